"""
Composite walkability score and its map color.
"""
import math
from typing import Mapping, Optional, Union

from ..model.types import CategoryRatings

# Red -> yellow -> green, low to high.
_RAMP = ((215, 48, 39), (254, 224, 139), (26, 152, 80))
NO_SCORE_COLOR = "#999999"


def overall_walkability(ratings: Union[CategoryRatings, Mapping[str, float]]) -> float:
    """
    Equal-weight mean of the eight category ratings.

    Args:
        ratings: CategoryRatings, or a mapping holding all eight rating names

    Returns:
        float: Mean rating, between the smallest and largest component

    Raises:
        ValidationError: If a rating is missing or outside [0, 5]
    """
    if not isinstance(ratings, CategoryRatings):
        ratings = CategoryRatings.from_mapping(ratings)
    values = ratings.values()
    return math.fsum(values) / len(values)


def score_color(value: Optional[float], lo: float, hi: float) -> str:
    """Hex color for value on a red (lo) to green (hi) ramp; grey when value is None."""
    if value is None:
        return NO_SCORE_COLOR
    t = 0.5 if hi <= lo else min(max((value - lo) / (hi - lo), 0.0), 1.0)
    if t <= 0.5:
        a, b, u = _RAMP[0], _RAMP[1], t * 2
    else:
        a, b, u = _RAMP[1], _RAMP[2], (t - 0.5) * 2
    r, g, bl = (round(x + (y - x) * u) for x, y in zip(a, b))
    return f"#{r:02x}{g:02x}{bl:02x}"
