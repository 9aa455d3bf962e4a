"""
Walkability scoring and the WalkHood reachability polygon.
"""
from ..model.types import CategoryRatings
from .walkability import overall_walkability, score_color
from .network import (
    DEFAULT_SNAP_TOLERANCE,
    DEFAULT_WALK_MINUTES,
    DEFAULT_WALK_SPEED,
    StreetNetwork,
    Walkhood,
    build_network,
    walkhood,
    walkhood_feature,
)

__all__ = [
    "CategoryRatings",
    "overall_walkability",
    "score_color",
    "DEFAULT_SNAP_TOLERANCE",
    "DEFAULT_WALK_MINUTES",
    "DEFAULT_WALK_SPEED",
    "StreetNetwork",
    "Walkhood",
    "build_network",
    "walkhood",
    "walkhood_feature",
]
