"""
Correlation, regression, binning and stability statistics.
"""
from .types import BinSummary, CorrelationResult, RegressionResult, StabilityCurve, StabilityPoint, Summary
from .correlation import correlate, pearson
from .regression import adjusted_r2, ols_fit, predict, significance_code
from .binning import quantile_bin, quantile_edges
from .stability import DEFAULT_THRESHOLDS, stability_curve, stability_knee
from .describe import describe

__all__ = [
    "BinSummary",
    "CorrelationResult",
    "RegressionResult",
    "StabilityCurve",
    "StabilityPoint",
    "Summary",
    "correlate",
    "pearson",
    "adjusted_r2",
    "ols_fit",
    "predict",
    "significance_code",
    "quantile_bin",
    "quantile_edges",
    "DEFAULT_THRESHOLDS",
    "stability_curve",
    "stability_knee",
    "describe",
]
