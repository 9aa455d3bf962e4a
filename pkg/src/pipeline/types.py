import operator
from dataclasses import dataclass, field
from typing import Annotated, Dict, List, Optional, Tuple, TypedDict

import numpy as np

from ..core.progress import ProgressTracker
from ..features.keywords import KeywordLists
from ..features.types import SegmentFeatures, ZMetricParams
from ..geo.index import SpatialIndex
from ..geo.projection import GeoPoint
from ..model.types import PhotoRecord, StreetSegment, VenueRecord
from ..stats.types import BinSummary, CorrelationResult, RegressionResult, StabilityCurve, Summary


@dataclass
class MetricOutcome:
    """One per-segment metric: its values, or why it is unavailable."""
    name: str
    values: Dict[str, float] = field(default_factory=dict)
    fractions: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    params: Optional[ZMetricParams] = None
    excluded: int = 0
    unavailable: Optional[str] = None

    @property
    def available(self) -> bool:
        return self.unavailable is None


@dataclass
class Joined:
    """Spatial join output as index pairs into the segment/photo/venue lists."""
    photo_idx: np.ndarray
    photo_seg_idx: np.ndarray
    venue_idx: np.ndarray
    venue_seg_idx: np.ndarray

    @property
    def matched_photos(self) -> int:
        return int(len(np.unique(self.photo_idx)))


class GraphState(TypedDict, total=False):
    tracker: ProgressTracker
    origin: GeoPoint
    segments: List[StreetSegment]
    photos: List[PhotoRecord]
    venues: List[VenueRecord]
    skipped: Dict[str, int]
    keywords: KeywordLists
    index: SpatialIndex
    joined: Joined
    features: List[SegmentFeatures]
    descriptives: Dict[str, Summary]
    metrics: Dict[str, MetricOutcome]
    correlations: Dict[str, CorrelationResult]
    regressions: Dict[str, RegressionResult]
    curves: Dict[str, StabilityCurve]
    knees: Dict[str, Optional[float]]
    bins: Dict[str, List[BinSummary]]
    scores: Dict[str, Optional[float]]
    # item name -> reason, merged across stages
    unavailable: Annotated[Dict[str, str], operator.or_]
