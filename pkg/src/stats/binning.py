"""
Equal-frequency binning of a metric with target-score whisker summaries.
"""
import math
from fractions import Fraction
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import InsufficientDataError, InvalidParameterError
from .types import BinSummary

WHISKER_PERCENTILES = (2.0, 50.0, 98.0)


def quantile_edges(values: Sequence[float], k: int) -> np.ndarray:
    """
    Inner cut points at the j/k quantiles (j = 1..k-1), linearly interpolated.

    Positions j(n-1)/k are computed exactly so an edge that falls on a data
    point equals that point.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = len(v)
    edges = []
    for j in range(1, k):
        pos = Fraction(j * (n - 1), k)
        h = math.floor(pos)
        frac = pos - h
        if frac == 0 or h + 1 >= n:
            edges.append(v[h])
        else:
            edges.append(v[h] + float(frac) * (v[h + 1] - v[h]))
    return np.array(edges, dtype=np.float64)


def quantile_bin(
    scores: Sequence[Tuple[str, float]],
    targets: Mapping[str, Optional[float]],
    k: int,
) -> List[BinSummary]:
    """
    Split segments into k equal-frequency metric bins and summarize the target.

    Values equal to a cut point go to the lower bin. Segments without a
    target are left out before the cut points are computed.

    Args:
        scores: (segment id, metric) pairs
        targets: Segment id -> target score
        k: Number of bins (3 for tertiles, 4 for quartiles)

    Returns:
        List[BinSummary]: k summaries from lowest to highest metric; empty bins
        carry a zero count and no statistics

    Raises:
        InvalidParameterError: If k < 2
        InsufficientDataError: If there are fewer than k distinct metric values
    """
    if k < 2:
        raise InvalidParameterError(f"Bin count must be at least 2, got {k}", "bins", {"k": k})
    rows = [(m, targets[sid]) for sid, m in scores if targets.get(sid) is not None]
    metric = np.array([r[0] for r in rows], dtype=np.float64)
    target = np.array([r[1] for r in rows], dtype=np.float64)
    distinct = len(np.unique(metric))
    if distinct < k:
        raise InsufficientDataError(
            f"Need at least {k} distinct metric values, got {distinct}",
            "bins",
            {"k": k, "distinct": distinct}
        )

    edges = quantile_edges(metric, k)
    assignment = np.searchsorted(edges, metric, side="left")
    summaries = []
    for b in range(k):
        members = assignment == b
        label = f"Q{b + 1}"
        if not members.any():
            summaries.append(BinSummary(label, 0, None, None, None, None, None))
            continue
        p2, median, p98 = np.percentile(target[members], WHISKER_PERCENTILES)
        summaries.append(BinSummary(
            label=label,
            count=int(members.sum()),
            metric_lo=float(metric[members].min()),
            metric_hi=float(metric[members].max()),
            median=float(median),
            p2=float(p2),
            p98=float(p98),
        ))
    return summaries
