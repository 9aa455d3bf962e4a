"""
Domain records, parsing and per-record classification.
"""
from .types import (
    CATEGORIES,
    RATING_FIELDS,
    CategoryRatings,
    Gender,
    MachineTag,
    NightClass,
    PhotoRecord,
    StreetSegment,
    VenueCategory,
    VenueRecord,
)
from .classify import DEFAULT_NIGHT_CONFIDENCE, classify_night, normalize_tag
from .parsing import (
    dataset_origin,
    parse_photos,
    parse_streets,
    parse_venues,
    photo_to_json,
    read_photos,
    read_streets,
    read_venues,
    street_to_feature,
    streets_to_geojson,
    venue_to_json,
)

__all__ = [
    "CATEGORIES",
    "RATING_FIELDS",
    "CategoryRatings",
    "Gender",
    "MachineTag",
    "NightClass",
    "PhotoRecord",
    "StreetSegment",
    "VenueCategory",
    "VenueRecord",
    "DEFAULT_NIGHT_CONFIDENCE",
    "classify_night",
    "normalize_tag",
    "dataset_origin",
    "parse_photos",
    "parse_streets",
    "parse_venues",
    "photo_to_json",
    "read_photos",
    "read_streets",
    "read_venues",
    "street_to_feature",
    "streets_to_geojson",
    "venue_to_json",
]
