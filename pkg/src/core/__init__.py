"""
Core functionality package
"""
from .errors import (
    ScoringFlowError,
    ValidationError,
    DegenerateStatisticsError,
)
from .progress import ProgressTracker

__all__ = ["ScoringFlowError", "ValidationError", "DegenerateStatisticsError", "ProgressTracker"]
