"""
Per-segment feature aggregation and the paired-fraction metrics.
"""
from .types import FEATURE_COLUMNS, CategoryDesign, MetricKind, SegmentFeatures, ZMetricParams
from .keywords import (
    DEFAULT_CAR_KEYWORDS,
    DEFAULT_WALK_KEYWORDS,
    KeywordLists,
    load_keyword_lists,
    match_tag_counts,
    read_keyword_set,
)
from .aggregate import PhotoTable, aggregate, aggregate_pairs, tabulate_photos
from .metrics import (
    category_design,
    category_fractions,
    fraction_pairs,
    mean_age,
    median_age,
    z_pair_metric,
    z_params,
)

__all__ = [
    "FEATURE_COLUMNS",
    "CategoryDesign",
    "MetricKind",
    "SegmentFeatures",
    "ZMetricParams",
    "DEFAULT_CAR_KEYWORDS",
    "DEFAULT_WALK_KEYWORDS",
    "KeywordLists",
    "load_keyword_lists",
    "match_tag_counts",
    "read_keyword_set",
    "PhotoTable",
    "aggregate",
    "aggregate_pairs",
    "tabulate_photos",
    "category_design",
    "category_fractions",
    "fraction_pairs",
    "mean_age",
    "median_age",
    "z_pair_metric",
    "z_params",
]
