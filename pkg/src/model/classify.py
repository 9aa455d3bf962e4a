"""
Per-record classification: night/day from machine tags, tag normalization.
"""
from ..core.errors import InvalidParameterError
from .types import NightClass, PhotoRecord

DEFAULT_NIGHT_CONFIDENCE = 0.95
NIGHT_LABEL = "night"


def normalize_tag(tag: str) -> str:
    """Lowercase and drop all whitespace, so "Street Light" == "streetlight"."""
    return "".join(tag.lower().split())


def classify_night(photo: PhotoRecord, threshold: float = DEFAULT_NIGHT_CONFIDENCE) -> NightClass:
    """
    Classify a photo as night, not night, or unclassified.

    Only machine tags with confidence strictly above the threshold count.

    Args:
        photo: Photo record
        threshold: Confidence cut-off in (0, 1]

    Returns:
        NightClass: NIGHT if a qualifying "night" tag exists, NOT_NIGHT if some
        other tag qualifies, UNCLASSIFIED otherwise
    """
    if not 0.0 < threshold <= 1.0:
        raise InvalidParameterError(
            f"Night confidence must be in (0, 1], got {threshold}",
            "features",
            {"threshold": threshold}
        )
    qualifying = [tag for tag in photo.machine_tags if tag.confidence > threshold]
    if not qualifying:
        return NightClass.UNCLASSIFIED
    if any(normalize_tag(tag.label) == NIGHT_LABEL for tag in qualifying):
        return NightClass.NIGHT
    return NightClass.NOT_NIGHT
