import math
import time

import numpy as np
import pytest

from src.core.errors import EmptyInputError, GeometryError, InvalidCoordinateError, InvalidParameterError
from src.geo import index as index_module
from src.geo.index import build_index, match_point_all, match_points, nearest_segment
from src.geo.polyline import (
    Polyline,
    buffer_contains,
    interpolate,
    locate_on_polyline,
    piece_distances,
    point_to_polyline_distance,
    substring_points,
)
from src.geo.projection import EARTH_RADIUS_M, GeoPoint, LocalProjection, PlanarPoint, centroid, project, unproject


def random_segments(rng, n=200, extent=2000.0):
    segments = []
    for i in range(n):
        start = rng.uniform(0, extent, 2)
        steps = rng.uniform(-150, 150, (int(rng.integers(1, 4)), 2))
        coords = np.vstack([start, start + np.cumsum(steps, axis=0)])
        segments.append((f"seg{i:03d}", Polyline.from_coords(coords)))
    return segments


def brute_distances(segments, p):
    return {sid: point_to_polyline_distance(p, line) for sid, line in segments}


def test_projection_origin_and_scale(origin):
    assert project(origin, origin) == PlanarPoint(0.0, 0.0)
    north = project(GeoPoint(origin.lon, origin.lat + 1.0), origin)
    assert north.y == pytest.approx(EARTH_RADIUS_M * math.pi / 180)
    east = project(GeoPoint(origin.lon + 1.0, origin.lat), origin)
    assert east.x == pytest.approx(EARTH_RADIUS_M * math.pi / 180 * math.cos(math.radians(origin.lat)))


def test_unproject_inverts_project(origin):
    rng = np.random.default_rng(1)
    for lon, lat in zip(rng.uniform(-0.3, 0.1, 50), rng.uniform(51.3, 51.7, 50)):
        back = unproject(project(GeoPoint(lon, lat), origin), origin)
        assert back.lon == pytest.approx(lon, abs=1e-9)
        assert back.lat == pytest.approx(lat, abs=1e-9)


def test_projection_arrays_match_scalar(projection):
    lons = np.array([-0.13, -0.12, -0.125])
    lats = np.array([51.50, 51.51, 51.505])
    xs, ys = projection.project_arrays(lons, lats)
    for x, y, lon, lat in zip(xs, ys, lons, lats):
        p = projection.project(GeoPoint(lon, lat))
        assert (x, y) == (p.x, p.y)


def test_projection_rejects_high_latitude(origin):
    with pytest.raises(InvalidCoordinateError):
        project(GeoPoint(0.0, 86.0), origin)
    with pytest.raises(InvalidCoordinateError):
        LocalProjection(GeoPoint(0.0, -85.0))


def test_geo_point_validation():
    with pytest.raises(InvalidCoordinateError):
        GeoPoint(181.0, 0.0)
    with pytest.raises(InvalidCoordinateError):
        GeoPoint(float("nan"), 0.0)
    with pytest.raises(InvalidCoordinateError):
        PlanarPoint(float("inf"), 0.0)


def test_centroid():
    c = centroid([GeoPoint(0.0, 50.0), GeoPoint(2.0, 52.0)])
    assert (c.lon, c.lat) == (1.0, 51.0)
    with pytest.raises(EmptyInputError):
        centroid([])


def test_polyline_validation():
    with pytest.raises(GeometryError):
        Polyline.from_coords([(0, 0)])
    with pytest.raises(GeometryError):
        Polyline.from_coords([(0, 0), (0, 0), (1, 1)])
    line = Polyline.from_coords([(0, 0), (3, 4), (3, 10)])
    assert line.length == pytest.approx(11.0)
    assert line.reversed().start == line.end


def test_point_to_polyline_distance():
    line = Polyline.from_coords([(0, 0), (100, 0)])
    assert point_to_polyline_distance(PlanarPoint(50, 0), line) == 0.0
    assert point_to_polyline_distance(PlanarPoint(50, 7), line) == 7.0
    # round cap past the end
    assert point_to_polyline_distance(PlanarPoint(103, 4), line) == pytest.approx(5.0)


def test_buffer_is_closed():
    line = Polyline.from_coords([(0, 0), (100, 0)])
    assert buffer_contains(line, PlanarPoint(10, 22.5), 22.5)
    assert not buffer_contains(line, PlanarPoint(10, 22.500001), 22.5)
    with pytest.raises(InvalidParameterError):
        buffer_contains(line, PlanarPoint(0, 0), 0.0)


def test_piece_distances_broadcast():
    d = piece_distances(np.array([0.0, 5.0]), np.array([1.0, 1.0]), 0.0, 0.0, 10.0, 0.0)
    assert d.tolist() == [1.0, 1.0]


def test_locate_interpolate_substring():
    line = Polyline.from_coords([(0, 0), (100, 0), (100, 100)])
    distance, s = locate_on_polyline(PlanarPoint(110, 50), line)
    assert distance == pytest.approx(10.0)
    assert s == pytest.approx(150.0)
    assert interpolate(line, 150.0) == PlanarPoint(100.0, 50.0)
    assert interpolate(line, -5.0) == PlanarPoint(0.0, 0.0)
    assert interpolate(line, 1e6) == PlanarPoint(100.0, 100.0)
    points = substring_points(line, 50.0, 150.0)
    assert points == [PlanarPoint(50.0, 0.0), PlanarPoint(100.0, 0.0), PlanarPoint(100.0, 50.0)]


def test_build_index_rejects_bad_parameters():
    segments = [("a", Polyline.from_coords([(0, 0), (10, 0)]))]
    with pytest.raises(EmptyInputError):
        build_index([])
    with pytest.raises(InvalidParameterError):
        build_index(segments, radius=0.0)
    with pytest.raises(InvalidParameterError):
        build_index(segments, cell_size=10.0, radius=22.5)
    index = build_index(segments, radius=22.5)
    assert index.cell_size == 45.0
    with pytest.raises(InvalidParameterError):
        match_point_all(index, dict(segments), PlanarPoint(0, 0), radius=30.0)


def test_buckets_cover_inflated_pieces():
    line = Polyline.from_coords([(0, 0), (100, 0)])
    index = build_index([("a", line)], cell_size=50.0, radius=22.5)
    for (ix, iy), ids in index.buckets().items():
        assert ids == frozenset({"a"})
    assert index.query_candidates(PlanarPoint(50, 20)) == {"a"}


def test_spatial_join_matches_brute_force():
    rng = np.random.default_rng(7)
    segments = random_segments(rng)
    lines = dict(segments)
    xs = rng.uniform(-100, 2100, 1000)
    ys = rng.uniform(-100, 2100, 1000)

    index = build_index(segments, radius=22.5)
    point_idx, seg_idx = match_points(index, xs, ys, 22.5)
    bulk = {}
    for p, s in zip(point_idx.tolist(), seg_idx.tolist()):
        bulk.setdefault(p, set()).add(index.segment_ids[s])

    for i, (x, y) in enumerate(zip(xs, ys)):
        p = PlanarPoint(float(x), float(y))
        distances = brute_distances(segments, p)
        expected = {sid for sid, d in distances.items() if d <= 22.5}
        assert match_point_all(index, lines, p, 22.5) == expected
        assert bulk.get(i, set()) == expected
        assert nearest_segment(index, lines, p) == min((d, sid) for sid, d in distances.items())[1]


def test_match_points_batches_agree(monkeypatch):
    rng = np.random.default_rng(3)
    segments = random_segments(rng, n=50, extent=500.0)
    index = build_index(segments, radius=22.5)
    xs = rng.uniform(0, 500, 300)
    ys = rng.uniform(0, 500, 300)
    whole = match_points(index, xs, ys)
    monkeypatch.setattr(index_module, "MATCH_BATCH", 7)
    batched = match_points(index, xs, ys)
    assert np.array_equal(whole[0], batched[0])
    assert np.array_equal(whole[1], batched[1])


def test_match_points_sorted_unique():
    line_a = Polyline.from_coords([(0, 0), (50, 0), (50, 50)])
    line_b = Polyline.from_coords([(0, 10), (50, 10)])
    index = build_index([("a", line_a), ("b", line_b)], radius=22.5)
    pts, segs = match_points(index, np.array([40.0, 500.0, 25.0]), np.array([5.0, 500.0, 5.0]))
    assert pts.tolist() == [0, 0, 2, 2]
    assert segs.tolist() == [0, 1, 0, 1]


def test_nearest_segment_tie_goes_to_smallest_id():
    above = Polyline.from_coords([(0, 10), (100, 10)])
    below = Polyline.from_coords([(0, -10), (100, -10)])
    for order in ([("b", above), ("a", below)], [("a", below), ("b", above)]):
        index = build_index(order, radius=22.5)
        assert nearest_segment(index, dict(order), PlanarPoint(50, 0)) == "a"


def test_nearest_segment_far_and_outside_grid():
    segments = [("near", Polyline.from_coords([(0, 0), (10, 0)])),
                ("far", Polyline.from_coords([(1000, 1000), (1010, 1000)]))]
    index = build_index(segments, radius=22.5)
    lines = dict(segments)
    assert nearest_segment(index, lines, PlanarPoint(500, 400)) == "near"
    assert nearest_segment(index, lines, PlanarPoint(-5000, -5000)) == "near"
    assert nearest_segment(index, lines, PlanarPoint(5000, 5000)) == "far"


def test_distance_ignores_translation_and_rotation():
    rng = np.random.default_rng(31)
    for sid, line in random_segments(rng, n=50):
        theta = rng.uniform(0, 2 * math.pi)
        shift = rng.uniform(-1e4, 1e4, 2)
        rotation = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        moved = Polyline.from_coords(line.coords @ rotation.T + shift)
        for x, y in rng.uniform(-200, 2200, (20, 2)):
            q = np.array([x, y]) @ rotation.T + shift
            expected = point_to_polyline_distance(PlanarPoint(float(x), float(y)), line)
            assert point_to_polyline_distance(PlanarPoint(*map(float, q)), moved) == pytest.approx(
                expected, rel=1e-9, abs=1e-7
            )


@pytest.mark.slow
def test_spatial_join_runtime():
    rng = np.random.default_rng(8)
    segments = random_segments(rng)
    lines = dict(segments)
    points = [PlanarPoint(float(x), float(y)) for x, y in rng.uniform(-100, 2100, (1000, 2))]

    started = time.perf_counter()
    index = build_index(segments, radius=22.5)
    for p in points:
        match_point_all(index, lines, p, 22.5)
        nearest_segment(index, lines, p)
    assert time.perf_counter() - started < 5.0
