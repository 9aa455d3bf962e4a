from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..model.types import CATEGORIES, VenueCategory


class MetricKind(str, Enum):
    """The three paired-fraction metrics and their fraction labels."""
    NIGHT = "night"
    GENDER = "gender"
    TAGS = "tags"

    @property
    def metric_name(self) -> str:
        return {"night": "photo_at_night", "gender": "manhood", "tags": "zwalkability"}[self.value]

    @property
    def fraction_labels(self) -> Tuple[str, str]:
        return {
            "night": ("night_fraction", "notnight_fraction"),
            "gender": ("male_fraction", "female_fraction"),
            "tags": ("walk_tag_fraction", "car_tag_fraction"),
        }[self.value]


@dataclass(frozen=True)
class SegmentFeatures:
    """Per-segment aggregates of matched photos and venues."""
    segment_id: str
    n_photos: int = 0
    night_count: int = 0
    notnight_count: int = 0
    male_users: int = 0
    female_users: int = 0
    ages: Tuple[int, ...] = ()
    tag_total: int = 0
    walk_tag_count: int = 0
    car_tag_count: int = 0
    venue_counts: Tuple[int, ...] = (0,) * len(CATEGORIES)
    views: int = 0
    favorites: int = 0
    comments: int = 0

    @property
    def n_venues(self) -> int:
        return sum(self.venue_counts)

    @property
    def unclassified_count(self) -> int:
        return self.n_photos - self.night_count - self.notnight_count

    def venue_count(self, category: VenueCategory) -> int:
        return self.venue_counts[CATEGORIES.index(category)]

    def to_row(self) -> Dict[str, object]:
        row = {
            "segment_id": self.segment_id,
            "n_photos": self.n_photos,
            "night_count": self.night_count,
            "notnight_count": self.notnight_count,
            "unclassified_count": self.unclassified_count,
            "male_users": self.male_users,
            "female_users": self.female_users,
            "n_ages": len(self.ages),
            "ages": " ".join(str(a) for a in self.ages),
            "tag_total": self.tag_total,
            "walk_tag_count": self.walk_tag_count,
            "car_tag_count": self.car_tag_count,
            "n_venues": self.n_venues,
        }
        for category, count in zip(CATEGORIES, self.venue_counts):
            row[f"venues_{category.value}"] = count
        row.update(views=self.views, favorites=self.favorites, comments=self.comments)
        return row


FEATURE_COLUMNS: Tuple[str, ...] = tuple(SegmentFeatures("").to_row())


@dataclass(frozen=True)
class ZMetricParams:
    """Across-segment mean and population deviation of both fractions."""
    kind: MetricKind
    n: int
    mu_a: float
    sigma_a: float
    mu_b: float
    sigma_b: float


@dataclass
class CategoryDesign:
    """Regression design built from venue category fractions."""
    segment_ids: List[str]
    X: np.ndarray
    y: np.ndarray
    names: List[str]
    reference: Optional[str]
    dropped_absent: List[str] = field(default_factory=list)
