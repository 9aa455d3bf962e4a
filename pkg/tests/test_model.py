import json

import numpy as np

import pytest

from src.core.errors import DuplicateKeyError, GeometryError, InputFileError, ParsingError, ValidationError
from src.geo.projection import GeoPoint
from src.model.classify import classify_night, normalize_tag
from src.model.parsing import (
    dataset_origin,
    parse_photos,
    parse_streets,
    parse_venues,
    photo_to_json,
    read_photos,
    read_streets,
    read_venues,
    streets_to_geojson,
    venue_to_json,
)
from src.model.types import CategoryRatings, Gender, MachineTag, NightClass, PhotoRecord, VenueCategory, VenueRecord

RATINGS = {
    "road_safety": 1, "easy_to_cross": 2, "sidewalks": 3, "hilliness": 4,
    "navigation": 5, "safety_from_crime": 1, "smart_beautiful": 2, "fun_relaxing": 2,
}


def street_feature(segment_id, coords, **properties):
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {"id": segment_id, **properties},
    }


def collection(*features):
    return {"type": "FeatureCollection", "features": list(features)}


def photo(photo_id="p1", tags=(), **fields):
    return PhotoRecord(
        id=photo_id,
        location=GeoPoint(-0.1276, 51.5072),
        owner_id="u1",
        machine_tags=tuple(MachineTag(label, confidence) for label, confidence in tags),
        **fields,
    )


def test_parse_streets():
    doc = collection(
        street_feature("a", [[-0.128, 51.507], [-0.127, 51.507]], walkability=3.2, safety=4.1),
        street_feature(7, [[-0.127, 51.507], [-0.127, 51.508]], ratings=RATINGS),
    )
    segments = parse_streets(json.dumps(doc))
    assert [s.id for s in segments] == ["a", "7"]
    assert segments[0].walkability == 3.2
    assert segments[0].safety == 4.1
    assert segments[0].ratings is None
    assert segments[1].ratings.as_dict()["navigation"] == 5
    assert segments[0].geometry.length == pytest.approx(69.4, abs=0.5)
    assert dataset_origin(doc).lon == pytest.approx(-0.12725)


def test_parse_streets_dotted_ratings():
    dotted = {f"ratings.{name}": value for name, value in RATINGS.items()}
    segments = parse_streets(collection(street_feature("a", [[0, 0], [0.001, 0]], **dotted)))
    assert segments[0].ratings == CategoryRatings.from_mapping(RATINGS)


def test_parse_streets_errors():
    line = [[0, 0], [0.001, 0]]
    with pytest.raises(DuplicateKeyError):
        parse_streets(collection(street_feature("a", line), street_feature("a", line)))
    with pytest.raises(GeometryError):
        parse_streets(collection({"type": "Feature", "geometry": {"type": "Point", "coordinates": [0, 0]},
                                  "properties": {"id": "a"}}))
    with pytest.raises(GeometryError):
        parse_streets(collection(street_feature("a", [[0, 0]])))
    with pytest.raises(ValidationError):
        parse_streets(collection(street_feature("a", line, walkability=6.0)))
    with pytest.raises(ValidationError):
        parse_streets(collection(street_feature("a", line, safety=0.1)))
    with pytest.raises(ParsingError):
        parse_streets("not json")
    with pytest.raises(ParsingError):
        parse_streets({"type": "Feature"})


def test_streets_round_trip_at_seven_decimals():
    doc = collection(street_feature("a", [[-0.1276001, 51.5072003], [-0.1266, 51.5081]], walkability=2.5))
    first = parse_streets(doc)
    again = parse_streets(streets_to_geojson(first))
    assert [p for p in again[0].coordinates] == [p for p in first[0].coordinates]
    assert again[0].walkability == 2.5


def test_parse_photos_lenient_skips_bad_lines():
    lines = [
        json.dumps({"id": "p1", "lon": -0.1, "lat": 51.5, "owner_id": "u1", "gender": "Female", "age": 31,
                    "user_tags": ["Street Light"], "machine_tags": [{"label": "night", "confidence": 0.97}]}),
        "",
        "{not json",
        json.dumps({"id": "p2", "lon": -0.1, "lat": 51.5}),
        json.dumps({"id": "p3", "lon": 200.0, "lat": 51.5, "owner_id": "u1"}),
        json.dumps({"id": "p1", "lon": -0.1, "lat": 51.5, "owner_id": "u2"}),
        json.dumps({"id": "p4", "lon": -0.1, "lat": 51.5, "owner_id": "u2", "age": 0}),
        json.dumps({"id": "p5", "lon": -0.1, "lat": 51.5, "owner_id": "u2", "views": 3}),
    ]
    photos, skipped = parse_photos(lines)
    assert [p.id for p in photos] == ["p1", "p5"]
    assert skipped == 5
    assert photos[0].gender is Gender.FEMALE
    assert photos[0].age == 31
    assert photos[1].views == 3


@pytest.mark.parametrize("bad_line, expected", [
    ("{not json", ParsingError),
    (json.dumps({"id": "p2", "lon": -0.1, "lat": 51.5}), ParsingError),
    (json.dumps({"id": "p1", "lon": -0.1, "lat": 51.5, "owner_id": "u9"}), DuplicateKeyError),
])
def test_parse_photos_strict_names_the_line(bad_line, expected):
    good = json.dumps({"id": "p1", "lon": -0.1, "lat": 51.5, "owner_id": "u1"})
    with pytest.raises(expected) as info:
        parse_photos([good, bad_line], strict=True)
    assert info.value.details["line_number"] == 2


def test_photo_json_round_trip():
    record = photo(tags=[("night", 0.97)], gender=Gender.MALE, age=40, user_tags=("run",), comments=2)
    parsed, skipped = parse_photos([photo_to_json(record)])
    assert skipped == 0
    assert parsed == [record]


def test_parse_venues_with_aliases():
    lines = [
        json.dumps({"id": "v1", "lon": 0.0, "lat": 51.0, "category": "Arts & Entertainment"}),
        json.dumps({"id": "v2", "lon": 0.0, "lat": 51.0, "category": "  nightlife   SPOT "}),
        json.dumps({"id": "v3", "lon": 0.0, "lat": 51.0, "category": "Spaceport"}),
        json.dumps({"id": "v4", "lon": 0.0, "lat": 51.0, "category": "food"}),
    ]
    venues, skipped = parse_venues(lines)
    assert [v.category for v in venues] == [VenueCategory.ARTS, VenueCategory.NIGHTLIFE, VenueCategory.FOOD]
    assert skipped == 1
    assert json.loads(venue_to_json(venues[0]))["category"] == "arts"


def test_category_parse():
    assert VenueCategory.parse("Shops & Services") is VenueCategory.SHOPPING
    assert VenueCategory.parse("Professional & Other Places") is VenueCategory.WORK
    with pytest.raises(ValidationError):
        VenueCategory.parse(3)


def test_classify_night_threshold_is_strict():
    assert classify_night(photo(tags=[("night", 0.96)])) is NightClass.NIGHT
    assert classify_night(photo(tags=[("night", 0.95)])) is NightClass.UNCLASSIFIED
    assert classify_night(photo(tags=[("night", 0.95), ("street", 0.99)])) is NightClass.NOT_NIGHT
    assert classify_night(photo(tags=[("Night", 0.99), ("street", 0.99)])) is NightClass.NIGHT
    assert classify_night(photo()) is NightClass.UNCLASSIFIED
    assert classify_night(photo(tags=[("night", 0.8)]), threshold=0.7) is NightClass.NIGHT


def test_classify_night_rejects_bad_threshold():
    with pytest.raises(ValidationError):
        classify_night(photo(), threshold=0.0)
    with pytest.raises(ValidationError):
        classify_night(photo(), threshold=1.5)


def test_normalize_tag():
    assert normalize_tag("Street Light") == "streetlight"
    assert normalize_tag(" CAR\t") == "car"


def test_ratings_validation():
    with pytest.raises(ValidationError):
        CategoryRatings.from_mapping({**RATINGS, "hilliness": None})
    with pytest.raises(ValidationError):
        CategoryRatings.from_mapping({**RATINGS, "hilliness": 5.5})


def test_read_missing_file(tmp_path):
    with pytest.raises(InputFileError):
        read_photos(tmp_path / "missing.jsonl")


def write_lines(path, *lines):
    path.write_bytes(b"".join(line + b"\n" for line in lines))
    return path


def test_undecodable_line_is_skipped(tmp_path):
    good = [photo_to_json(photo(f"p{k}")).encode("utf-8") for k in (1, 2)]
    path = write_lines(tmp_path / "photos.jsonl", good[0], b'{"id": "\xff\xfe"}', good[1])
    photos, skipped = read_photos(path)
    assert [p.id for p in photos] == ["p1", "p2"]
    assert skipped == 1

    with pytest.raises(ParsingError) as info:
        read_photos(path, strict=True)
    assert info.value.line_number == 2
    assert info.value.exit_code == 1


def test_undecodable_venue_and_street_files(tmp_path):
    venue = venue_to_json(VenueRecord("v1", GeoPoint(-0.1276, 51.5072), VenueCategory.FOOD)).encode("utf-8")
    venues, skipped = read_venues(write_lines(tmp_path / "venues.jsonl", b"\xc3(", venue))
    assert [v.id for v in venues] == ["v1"]
    assert skipped == 1

    streets = tmp_path / "streets.geojson"
    streets.write_bytes(b'{"type": "FeatureCollection",\n"features": ["\xff"]}')
    with pytest.raises(ParsingError) as info:
        read_streets(streets)
    assert info.value.line_number == 2


def test_classify_night_is_monotone_in_threshold():
    rng = np.random.default_rng(21)
    labels = ["night", "street", "daylight", "Night"]
    photos = [
        photo(f"p{i}", tags=[(labels[rng.integers(0, 4)], float(c)) for c in rng.uniform(0.5, 1.0, rng.integers(0, 4))])
        for i in range(500)
    ]
    previous_night = previous_classified = None
    for threshold in (0.5, 0.7, 0.9, 0.95, 0.99, 1.0):
        classes = [classify_night(p, threshold) for p in photos]
        night = {i for i, c in enumerate(classes) if c is NightClass.NIGHT}
        classified = {i for i, c in enumerate(classes) if c is not NightClass.UNCLASSIFIED}
        if previous_night is not None:
            assert night <= previous_night
            assert classified <= previous_classified
        previous_night, previous_classified = night, classified
    assert not previous_classified


def test_normalize_tag_is_idempotent():
    rng = np.random.default_rng(22)
    alphabet = list("aBc Dé\tz\n1-") + ["Street Light", "  "]
    for _ in range(1000):
        tag = "".join(rng.choice(alphabet, rng.integers(0, 12)))
        once = normalize_tag(tag)
        assert normalize_tag(once) == once
        assert once == once.lower() and not any(ch.isspace() for ch in once)
