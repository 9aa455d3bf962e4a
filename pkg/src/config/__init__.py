"""
Configuration Package
"""
from .settings import PipelineConfig, load_settings

__all__ = ["PipelineConfig", "load_settings"]
