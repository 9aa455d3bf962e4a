"""
Input parsing and serialization for streets (GeoJSON), photos and venues (JSON Lines).
"""
import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Tuple, TypeVar, Union

import geojson

from ..core.errors import (
    DuplicateKeyError,
    GeometryError,
    InputFileError,
    ParsingError,
    ScoringFlowError,
    ValidationError,
)
from ..geo.polyline import Polyline
from ..geo.projection import GeoPoint, LocalProjection, PlanarPoint, centroid
from .types import (
    RATING_FIELDS,
    CategoryRatings,
    Gender,
    MachineTag,
    PhotoRecord,
    StreetSegment,
    VenueCategory,
    VenueRecord,
)

logger = logging.getLogger(__name__)

# Decimal places kept for lon/lat in GeoJSON output (about 1 cm).
COORDINATE_PRECISION = 7

# Skipped lines logged individually before switching to a summary.
MAX_SKIP_WARNINGS = 10

T = TypeVar("T")
Document = Union[str, Mapping[str, Any]]


def _as_id(value: Any, field: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ValidationError(f"{field} must be a string, got {value!r}", "parse", {field: repr(value)})
    text = str(value)
    if not text:
        raise ValidationError(f"{field} must not be empty", "parse")
    return text


def _as_number(value: Any, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{field} must be a number, got {value!r}", "parse", {field: repr(value)})
    return float(value)


def _optional_int(obj: Mapping[str, Any], field: str) -> Optional[int]:
    value = obj.get(field)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{field} must be an integer, got {value!r}", "parse", {field: repr(value)})
    return value


def _geo_point(lon: Any, lat: Any) -> GeoPoint:
    return GeoPoint(lon=_as_number(lon, "lon"), lat=_as_number(lat, "lat"))


def _load_document(document: Document) -> Mapping[str, Any]:
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ParsingError(f"Streets document is not valid JSON: {e.msg}", line_number=e.lineno)
    if not isinstance(document, Mapping) or document.get("type") != "FeatureCollection":
        raise ParsingError("Streets document must be a GeoJSON FeatureCollection")
    features = document.get("features")
    if not isinstance(features, list):
        raise ParsingError("FeatureCollection has no features list")
    return document


def _feature_vertices(feature: Any, position: int) -> Tuple[Mapping[str, Any], List[GeoPoint]]:
    if not isinstance(feature, Mapping):
        raise ParsingError(f"Feature {position} is not an object", details={"feature": position})
    geometry = feature.get("geometry")
    if not isinstance(geometry, Mapping) or geometry.get("type") != "LineString":
        raise GeometryError(
            f"Feature {position} is not a LineString",
            "parse",
            {"feature": position, "type": geometry.get("type") if isinstance(geometry, Mapping) else None}
        )
    coords = geometry.get("coordinates")
    if not isinstance(coords, list) or len(coords) < 2:
        raise GeometryError(
            f"Feature {position} LineString needs at least 2 points",
            "parse",
            {"feature": position}
        )
    vertices = []
    for c in coords:
        if not isinstance(c, (list, tuple)) or len(c) < 2:
            raise GeometryError(f"Feature {position} has a malformed position: {c!r}", "parse")
        vertices.append(_geo_point(c[0], c[1]))
    properties = feature.get("properties") or {}
    if not isinstance(properties, Mapping):
        raise ParsingError(f"Feature {position} properties must be an object", details={"feature": position})
    return properties, vertices


def _ratings(properties: Mapping[str, Any]) -> Optional[CategoryRatings]:
    nested = properties.get("ratings")
    values: Dict[str, Any] = dict(nested) if isinstance(nested, Mapping) else {}
    for name in RATING_FIELDS:
        dotted = properties.get(f"ratings.{name}")
        if dotted is not None:
            values.setdefault(name, dotted)
    if not any(values.get(name) is not None for name in RATING_FIELDS):
        return None
    return CategoryRatings.from_mapping(
        {k: _as_number(values[k], k) if values.get(k) is not None else None for k in RATING_FIELDS}
    )


def dataset_origin(document: Document) -> GeoPoint:
    """
    Mean lon/lat over every street vertex; the projection origin for a run.

    Raises:
        EmptyInputError: If the collection has no vertices
    """
    doc = _load_document(document)
    points: List[GeoPoint] = []
    for position, feature in enumerate(doc["features"]):
        points.extend(_feature_vertices(feature, position)[1])
    return centroid(points)


def parse_streets(document: Document, origin: Optional[GeoPoint] = None) -> List[StreetSegment]:
    """
    Parse a GeoJSON FeatureCollection of LineStrings into street segments.

    Args:
        document: GeoJSON text or an already decoded mapping
        origin: Projection origin; defaults to dataset_origin(document)

    Returns:
        List[StreetSegment]: One segment per feature, in document order

    Raises:
        DuplicateKeyError: If two features share an id
        GeometryError: For non-LineString or degenerate geometries
        ValidationError: For missing ids or out-of-range scores
    """
    doc = _load_document(document)
    if origin is None:
        origin = dataset_origin(doc)
    projection = LocalProjection(origin)

    segments: List[StreetSegment] = []
    seen: Dict[str, int] = {}
    for position, feature in enumerate(doc["features"]):
        properties, vertices = _feature_vertices(feature, position)
        if properties.get("id") is None:
            raise ValidationError(f"Feature {position} has no id property", "parse", {"feature": position})
        segment_id = _as_id(properties["id"], "id")
        if segment_id in seen:
            raise DuplicateKeyError(
                f"Duplicate street id {segment_id!r}",
                "parse",
                {"id": segment_id, "first_feature": seen[segment_id], "feature": position}
            )
        seen[segment_id] = position

        xs, ys = projection.project_arrays([v.lon for v in vertices], [v.lat for v in vertices])
        try:
            geometry = Polyline(tuple(PlanarPoint(float(x), float(y)) for x, y in zip(xs, ys)))
        except GeometryError as e:
            e.details.setdefault("id", segment_id)
            raise
        walkability = properties.get("walkability")
        safety = properties.get("safety")
        segments.append(StreetSegment(
            id=segment_id,
            geometry=geometry,
            coordinates=tuple(vertices),
            walkability=_as_number(walkability, "walkability") if walkability is not None else None,
            safety=_as_number(safety, "safety") if safety is not None else None,
            ratings=_ratings(properties),
        ))

    logger.info("Parsed %d street segments", len(segments))
    return segments


def _parse_photo(obj: Mapping[str, Any]) -> PhotoRecord:
    for field in ("id", "lon", "lat", "owner_id"):
        if obj.get(field) is None:
            raise ValidationError(f"Missing required field {field!r}", "parse", {"field": field})
    gender = obj.get("gender")
    age = _optional_int(obj, "age")

    user_tags = obj.get("user_tags") or []
    if not isinstance(user_tags, list) or not all(isinstance(t, str) for t in user_tags):
        raise ValidationError("user_tags must be a list of strings", "parse")

    raw_machine = obj.get("machine_tags") or []
    if not isinstance(raw_machine, list):
        raise ValidationError("machine_tags must be a list", "parse")
    machine_tags = []
    for tag in raw_machine:
        if not isinstance(tag, Mapping) or "label" not in tag or "confidence" not in tag:
            raise ValidationError(f"Malformed machine tag: {tag!r}", "parse")
        machine_tags.append(MachineTag(label=tag["label"], confidence=_as_number(tag["confidence"], "confidence")))

    return PhotoRecord(
        id=_as_id(obj["id"], "id"),
        location=_geo_point(obj["lon"], obj["lat"]),
        owner_id=_as_id(obj["owner_id"], "owner_id"),
        gender=Gender.parse(gender) if gender is not None else None,
        age=age,
        user_tags=tuple(user_tags),
        machine_tags=tuple(machine_tags),
        views=_optional_int(obj, "views"),
        favorites=_optional_int(obj, "favorites"),
        comments=_optional_int(obj, "comments"),
    )


def _parse_venue(obj: Mapping[str, Any]) -> VenueRecord:
    for field in ("id", "lon", "lat", "category"):
        if obj.get(field) is None:
            raise ValidationError(f"Missing required field {field!r}", "parse", {"field": field})
    return VenueRecord(
        id=_as_id(obj["id"], "id"),
        location=_geo_point(obj["lon"], obj["lat"]),
        category=VenueCategory.parse(obj["category"]),
    )


def _parse_lines(
    stream: Iterable[Union[str, bytes]],
    build: Callable[[Mapping[str, Any]], T],
    strict: bool,
    kind: str,
) -> Tuple[List[T], int]:
    records: List[T] = []
    seen = set()
    skipped = 0
    for line_number, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            if isinstance(line, bytes):
                line = _decode_line(line, line_number)
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParsingError(f"Invalid JSON: {e.msg}", line_number=line_number)
            if not isinstance(obj, Mapping):
                raise ParsingError("Line is not a JSON object", line_number=line_number)
            record = build(obj)
            if record.id in seen:
                raise DuplicateKeyError(
                    f"Duplicate {kind} id {record.id!r}",
                    "parse",
                    {"id": record.id, "line_number": line_number}
                )
            seen.add(record.id)
            records.append(record)
        except ScoringFlowError as e:
            e.details.setdefault("line_number", line_number)
            if strict:
                if not isinstance(e, (ParsingError, DuplicateKeyError)):
                    raise ParsingError(
                        f"Line {line_number}: {e.message}",
                        details=e.details,
                        line_number=line_number,
                    ) from e
                raise
            skipped += 1
            if skipped <= MAX_SKIP_WARNINGS:
                logger.warning("Skipping %s line %d: %s", kind, line_number, e.message)

    if skipped:
        logger.warning("Skipped %d malformed %s lines", skipped, kind)
    logger.info("Parsed %d %s records", len(records), kind)
    return records, skipped


def parse_photos(stream: Iterable[Union[str, bytes]], strict: bool = False) -> Tuple[List[PhotoRecord], int]:
    """
    Parse photo records from JSON Lines.

    Args:
        stream: Lines of text or UTF-8 bytes (an open file works)
        strict: Abort on the first malformed line instead of skipping it

    Returns:
        Tuple[List[PhotoRecord], int]: Records in input order and the skip count

    Raises:
        ParsingError: In strict mode, naming the offending line number
    """
    return _parse_lines(stream, _parse_photo, strict, "photo")


def parse_venues(stream: Iterable[Union[str, bytes]], strict: bool = False) -> Tuple[List[VenueRecord], int]:
    """Parse venue records from JSON Lines; unknown categories are malformed lines."""
    return _parse_lines(stream, _parse_venue, strict, "venue")


def street_to_feature(segment: StreetSegment) -> geojson.Feature:
    """GeoJSON feature for a segment; coordinates keep COORDINATE_PRECISION decimals."""
    properties: Dict[str, Any] = {"id": segment.id}
    if segment.walkability is not None:
        properties["walkability"] = segment.walkability
    if segment.safety is not None:
        properties["safety"] = segment.safety
    if segment.ratings is not None:
        properties["ratings"] = segment.ratings.as_dict()
    line = geojson.LineString(
        [[p.lon, p.lat] for p in segment.coordinates],
        precision=COORDINATE_PRECISION,
    )
    return geojson.Feature(geometry=line, properties=properties)


def streets_to_geojson(segments: Iterable[StreetSegment]) -> str:
    collection = geojson.FeatureCollection([street_to_feature(s) for s in segments])
    return geojson.dumps(collection, sort_keys=True)


def photo_to_json(photo: PhotoRecord) -> str:
    """One JSON Lines record; optional fields are omitted when absent."""
    obj: Dict[str, Any] = {
        "id": photo.id,
        "lon": photo.location.lon,
        "lat": photo.location.lat,
        "owner_id": photo.owner_id,
    }
    if photo.gender is not None:
        obj["gender"] = photo.gender.value
    if photo.age is not None:
        obj["age"] = photo.age
    if photo.user_tags:
        obj["user_tags"] = list(photo.user_tags)
    if photo.machine_tags:
        obj["machine_tags"] = [{"label": t.label, "confidence": t.confidence} for t in photo.machine_tags]
    for name in ("views", "favorites", "comments"):
        value = getattr(photo, name)
        if value is not None:
            obj[name] = value
    return json.dumps(obj, sort_keys=True)


def venue_to_json(venue: VenueRecord) -> str:
    return json.dumps(
        {"id": venue.id, "lon": venue.location.lon, "lat": venue.location.lat, "category": venue.category.value},
        sort_keys=True,
    )


def _decode_line(raw: bytes, line_number: int) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParsingError(f"Invalid UTF-8 at byte {e.start}", details={"byte": e.start}, line_number=line_number)


def _read_bytes(path: Union[str, Path]) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as e:
        raise InputFileError(f"Cannot read {path}: {e.strerror}", "ingest", {"path": str(path)})


def read_streets(path: Union[str, Path]) -> Tuple[List[StreetSegment], GeoPoint]:
    """Load a streets file, returning the segments and the projection origin used."""
    raw = _read_bytes(path)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParsingError(f"{path}: invalid UTF-8 at byte {e.start}", "ingest", {"path": str(path)},
                           line_number=raw.count(b"\n", 0, e.start) + 1)
    doc = _load_document(text)
    origin = dataset_origin(doc)
    return parse_streets(doc, origin), origin


# Lines stay bytes until parsed so that one badly encoded line is skipped like any malformed line.
def read_photos(path: Union[str, Path], strict: bool = False) -> Tuple[List[PhotoRecord], int]:
    return parse_photos(_read_bytes(path).splitlines(), strict)


def read_venues(path: Union[str, Path], strict: bool = False) -> Tuple[List[VenueRecord], int]:
    return parse_venues(_read_bytes(path).splitlines(), strict)
