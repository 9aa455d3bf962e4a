"""
StreetScore Package
"""
from . import config
from . import core

__version__ = "0.1.0"
