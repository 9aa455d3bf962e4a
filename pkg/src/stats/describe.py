from typing import Iterable

import numpy as np

from .types import Summary


def describe(values: Iterable[float]) -> Summary:
    """Descriptive min / median / max / mean; all None for an empty input."""
    v = np.asarray(list(values), dtype=np.float64)
    if not v.size:
        return Summary(n=0, min=None, median=None, max=None, mean=None)
    return Summary(
        n=int(v.size),
        min=float(v.min()),
        median=float(np.median(v)),
        max=float(v.max()),
        mean=float(v.mean()),
    )
