"""
Pearson product-moment correlation.
"""
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg, special

from ..core.errors import InsufficientDataError, InvalidParameterError, UndefinedCorrelationError
from .types import CorrelationResult


def _centered(x: Sequence[float], y: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidParameterError(
            f"Series lengths differ: {x.shape} vs {y.shape}",
            "stats",
            {"len_x": int(x.size), "len_y": int(y.size)}
        )
    if len(x) < 3:
        raise InsufficientDataError(f"Correlation needs at least 3 points, got {len(x)}", "stats", {"n": len(x)})
    if (x == x[0]).all() or (y == y[0]).all():
        raise UndefinedCorrelationError(
            "Correlation is undefined for a constant series",
            "stats",
            {"constant_x": bool((x == x[0]).all()), "constant_y": bool((y == y[0]).all())}
        )
    return x - x.mean(), y - y.mean()


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Pearson correlation coefficient of two equal-length series.

    Raises:
        InvalidParameterError: If the lengths differ
        InsufficientDataError: With fewer than 3 points
        UndefinedCorrelationError: If either series is constant
    """
    xm, ym = _centered(x, y)
    r = float(np.dot(xm / linalg.norm(xm), ym / linalg.norm(ym)))
    return max(min(r, 1.0), -1.0)


def correlate(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """pearson plus its two-sided p-value under the null of no correlation."""
    r = pearson(x, y)
    n = len(x)
    ab = n / 2 - 1
    p_value = float(2 * special.betainc(ab, ab, 0.5 * (1 - abs(r))))
    return CorrelationResult(r=r, p_value=min(max(p_value, 0.0), 1.0), n=n)
