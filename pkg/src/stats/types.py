from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class RegressionResult:
    """
    Ordinary least squares fit with an intercept.

    Per-term lists (estimates, std_errors, t_values, p_values, codes) run
    over ["intercept"] + names.
    """
    names: List[str]
    intercept: float
    coefficients: Dict[str, float]
    estimates: List[float]
    std_errors: List[float]
    t_values: List[float]
    p_values: List[float]
    codes: List[str]
    r2: float
    adj_r2: float
    n: int
    p: int
    target: Optional[str] = None
    reference: Optional[str] = None
    dropped_absent: List[str] = field(default_factory=list)

    @property
    def terms(self) -> List[str]:
        return ["intercept"] + list(self.names)

    @property
    def df_resid(self) -> int:
        return self.n - self.p - 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target": self.target,
            "n": self.n,
            "p": self.p,
            "df_resid": self.df_resid,
            "r2": self.r2,
            "adj_r2": self.adj_r2,
            "reference_category": self.reference,
            "dropped_absent_categories": list(self.dropped_absent),
            "terms": [
                {
                    "name": name,
                    "estimate": est,
                    "std_error": se,
                    "t_value": _json_float(t),
                    "p_value": pv,
                    "significance": code,
                }
                for name, est, se, t, pv, code in zip(
                    self.terms, self.estimates, self.std_errors, self.t_values, self.p_values, self.codes
                )
            ],
        }


def _json_float(value: float):
    # inf t-values only arise from exact fits
    if value == float("inf"):
        return "inf"
    if value == float("-inf"):
        return "-inf"
    return value


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_value: float
    n: int


@dataclass(frozen=True)
class BinSummary:
    """Target-score summary of one equal-frequency metric bin."""
    label: str
    count: int
    metric_lo: Optional[float]
    metric_hi: Optional[float]
    median: Optional[float]
    p2: Optional[float]
    p98: Optional[float]

    def to_row(self) -> Dict[str, Any]:
        return {
            "bin": self.label,
            "count": self.count,
            "metric_lo": self.metric_lo,
            "metric_hi": self.metric_hi,
            "median": self.median,
            "p2": self.p2,
            "p98": self.p98,
        }


@dataclass(frozen=True)
class StabilityPoint:
    threshold: float
    r: Optional[float]
    n_segments: int


@dataclass
class StabilityCurve:
    """Correlation over segments whose data volume reaches each threshold."""
    points: List[StabilityPoint]
    metric: Optional[str] = None
    target: Optional[str] = None

    def to_rows(self) -> List[Dict[str, Any]]:
        return [{"threshold": p.threshold, "r": p.r, "n_segments": p.n_segments} for p in self.points]


@dataclass(frozen=True)
class Summary:
    """min / median / max of a per-segment quantity."""
    n: int
    min: Optional[float]
    median: Optional[float]
    max: Optional[float]
    mean: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "min": self.min, "median": self.median, "max": self.max, "mean": self.mean}
