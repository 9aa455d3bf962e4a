"""
Domain records for streets, photos and venues.
"""
import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Dict, Mapping, Optional, Tuple

from ..core.errors import InvalidParameterError, ValidationError
from ..geo.polyline import Polyline
from ..geo.projection import GeoPoint

WALKABILITY_RANGE = (1.0, 5.0)
SAFETY_RANGE = (0.5, 5.0)
RATING_RANGE = (0.0, 5.0)
MAX_AGE = 130


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"

    @classmethod
    def parse(cls, text: str) -> "Gender":
        try:
            return cls(text.strip().lower())
        except (ValueError, AttributeError):
            raise ValidationError(f"Unknown gender: {text!r}", "parse", {"gender": repr(text)})


_CATEGORY_ALIASES = {
    "arts & entertainment": "arts",
    "college & education": "college",
    "college & university": "college",
    "nightlife spot": "nightlife",
    "outdoors & recreation": "outdoors",
    "great outdoors": "outdoors",
    "residence": "residential",
    "shops": "shopping",
    "shop & service": "shopping",
    "shops & services": "shopping",
    "travel & transport": "travel",
    "professional & other places": "work",
}


class VenueCategory(str, Enum):
    """Top-level venue categories, in regression column order."""
    ARTS = "arts"
    COLLEGE = "college"
    FOOD = "food"
    NIGHTLIFE = "nightlife"
    OUTDOORS = "outdoors"
    RESIDENTIAL = "residential"
    SHOPPING = "shopping"
    TRAVEL = "travel"
    WORK = "work"

    @classmethod
    def parse(cls, text: str) -> "VenueCategory":
        """
        Case-insensitive parse accepting the long category names.

        Raises:
            ValidationError: If the name is not a known category or alias
        """
        if not isinstance(text, str):
            raise ValidationError(f"Category must be a string, got {text!r}", "parse")
        key = " ".join(text.split()).lower()
        key = _CATEGORY_ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValidationError(f"Unknown venue category: {text!r}", "parse", {"category": text})


CATEGORIES: Tuple[VenueCategory, ...] = tuple(VenueCategory)


class NightClass(str, Enum):
    NIGHT = "night"
    NOT_NIGHT = "notnight"
    UNCLASSIFIED = "unclassified"


def _check_range(name: str, value: float, bounds: Tuple[float, float], step: str = "parse") -> None:
    lo, hi = bounds
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(f"{name} must be a finite number, got {value!r}", step, {name: repr(value)})
    if not lo <= value <= hi:
        raise ValidationError(f"{name} {value} outside [{lo}, {hi}]", step, {name: value, "range": [lo, hi]})


@dataclass(frozen=True)
class MachineTag:
    label: str
    confidence: float

    def __post_init__(self):
        if not isinstance(self.label, str):
            raise ValidationError(f"Machine tag label must be a string, got {self.label!r}", "parse")
        _check_range("confidence", self.confidence, (0.0, 1.0))


@dataclass(frozen=True)
class CategoryRatings:
    """The eight street-level walkability category ratings, each in [0, 5]."""
    road_safety: float
    easy_to_cross: float
    sidewalks: float
    hilliness: float
    navigation: float
    safety_from_crime: float
    smart_beautiful: float
    fun_relaxing: float

    def __post_init__(self):
        for f in fields(self):
            _check_range(f.name, getattr(self, f.name), RATING_RANGE, "score")

    @classmethod
    def from_mapping(cls, values: Mapping[str, float]) -> "CategoryRatings":
        """
        Build ratings from a name -> value mapping.

        Raises:
            ValidationError: If any of the eight ratings is missing or out of range
        """
        missing = [name for name in RATING_FIELDS if values.get(name) is None]
        if missing:
            raise ValidationError(
                f"Missing category ratings: {', '.join(missing)}",
                "score",
                {"missing": missing}
            )
        return cls(**{name: values[name] for name in RATING_FIELDS})

    def values(self) -> Tuple[float, ...]:
        return tuple(getattr(self, name) for name in RATING_FIELDS)

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(RATING_FIELDS, self.values()))


RATING_FIELDS: Tuple[str, ...] = tuple(f.name for f in fields(CategoryRatings))


@dataclass(frozen=True)
class StreetSegment:
    """A street polyline with optional ground-truth scores."""
    id: str
    geometry: Polyline
    coordinates: Tuple[GeoPoint, ...]
    walkability: Optional[float] = None
    safety: Optional[float] = None
    ratings: Optional[CategoryRatings] = None

    def __post_init__(self):
        if self.walkability is not None:
            _check_range("walkability", self.walkability, WALKABILITY_RANGE)
        if self.safety is not None:
            _check_range("safety", self.safety, SAFETY_RANGE)

    def target(self, name: str) -> Optional[float]:
        """Value of a target score by name ("walkability" or "safety")."""
        if name not in ("walkability", "safety"):
            raise InvalidParameterError(f"Unknown target score: {name}", "stats", {"target": name})
        return getattr(self, name)


@dataclass(frozen=True)
class PhotoRecord:
    id: str
    location: GeoPoint
    owner_id: str
    gender: Optional[Gender] = None
    age: Optional[int] = None
    user_tags: Tuple[str, ...] = ()
    machine_tags: Tuple[MachineTag, ...] = ()
    views: Optional[int] = None
    favorites: Optional[int] = None
    comments: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "user_tags", tuple(self.user_tags))
        object.__setattr__(self, "machine_tags", tuple(self.machine_tags))
        if self.age is not None:
            if isinstance(self.age, bool) or not isinstance(self.age, int) or not 1 <= self.age <= MAX_AGE:
                raise ValidationError(f"Age must be an integer in [1, {MAX_AGE}], got {self.age!r}", "parse")
        for name in ("views", "favorites", "comments"):
            value = getattr(self, name)
            if value is not None and (isinstance(value, bool) or not isinstance(value, int) or value < 0):
                raise ValidationError(f"{name} must be a non-negative integer, got {value!r}", "parse")


@dataclass(frozen=True)
class VenueRecord:
    id: str
    location: GeoPoint
    category: VenueCategory
