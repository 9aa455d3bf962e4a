"""
Correlation stability versus per-segment data volume.
"""
import logging
from typing import Mapping, Optional, Sequence

import numpy as np

from ..core.errors import DegenerateStatisticsError, InvalidParameterError
from .correlation import pearson
from .types import StabilityCurve, StabilityPoint

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (1, 3, 10, 30, 100, 300, 1000, 3000)
DEFAULT_KNEE_TOLERANCE = 0.05


def stability_curve(
    scores: Mapping[str, float],
    targets: Mapping[str, Optional[float]],
    counts: Mapping[str, float],
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> StabilityCurve:
    """
    Correlation of metric and target over segments with counts >= T, per T.

    Entries with fewer than 3 segments or a constant series have r = None.

    Args:
        scores: Segment id -> metric value
        targets: Segment id -> target score
        counts: Segment id -> data volume (photos, tags, ...)
        thresholds: Ascending volume thresholds

    Raises:
        InvalidParameterError: If thresholds are not ascending
    """
    thresholds = list(thresholds)
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise InvalidParameterError("Stability thresholds must be ascending", "curve", {"thresholds": thresholds})

    ids = sorted(sid for sid in scores if targets.get(sid) is not None and sid in counts)
    x = np.array([scores[sid] for sid in ids], dtype=np.float64)
    y = np.array([targets[sid] for sid in ids], dtype=np.float64)
    volume = np.array([counts[sid] for sid in ids], dtype=np.float64)

    points = []
    for t in thresholds:
        keep = volume >= t
        n = int(keep.sum())
        r = None
        if n >= 3:
            try:
                r = pearson(x[keep], y[keep])
            except DegenerateStatisticsError:
                r = None
        points.append(StabilityPoint(threshold=t, r=r, n_segments=n))
    return StabilityCurve(points=points)


def stability_knee(curve: StabilityCurve, tolerance: float = DEFAULT_KNEE_TOLERANCE) -> Optional[float]:
    """
    Smallest threshold from which every defined r stays within tolerance of the
    r at the largest defined threshold; None if no r is defined.
    """
    defined = [p for p in curve.points if p.r is not None]
    if not defined:
        return None
    final = defined[-1].r
    knee = defined[-1].threshold
    for point in reversed(defined):
        if abs(point.r - final) > tolerance:
            break
        knee = point.threshold
    return knee
