import itertools

import geojson
import numpy as np
import pytest

from conftest import make_segment
from src.core.errors import InvalidParameterError, UnreachableOriginError, ValidationError
from src.geo.projection import LocalProjection, PlanarPoint
from src.model.types import RATING_FIELDS, CategoryRatings
from src.score.network import build_network, walkhood, walkhood_feature
from src.score.walkability import NO_SCORE_COLOR, overall_walkability, score_color


def ratings(*values):
    return CategoryRatings(*values)


def grid_segments(blocks=4, size=100.0):
    segments = []
    for i in range(blocks + 1):
        for j in range(blocks):
            segments.append(make_segment(f"h{i}{j}", [(j * size, i * size), ((j + 1) * size, i * size)]))
            segments.append(make_segment(f"v{i}{j}", [(i * size, j * size), (i * size, (j + 1) * size)]))
    return segments


def test_overall_walkability_example():
    assert overall_walkability(ratings(1, 2, 3, 4, 5, 1, 2, 2)) == 2.5
    assert overall_walkability(dict(zip(RATING_FIELDS, (1, 2, 3, 4, 5, 1, 2, 2)))) == 2.5


def test_overall_walkability_is_a_symmetric_mean():
    rng = np.random.default_rng(12)
    for values in rng.uniform(0, 5, size=(10_000, 8)):
        score = overall_walkability(ratings(*values))
        assert values.min() <= score <= values.max()
    values = rng.uniform(0, 5, 8)
    scores = {overall_walkability(ratings(*p)) for p in itertools.islice(itertools.permutations(values), 500)}
    assert len(scores) == 1


def test_overall_walkability_validation():
    with pytest.raises(ValidationError):
        overall_walkability({"road_safety": 3.0})
    with pytest.raises(ValidationError):
        ratings(1, 2, 3, 4, 5, 1, 2, 6)


def test_score_color():
    assert score_color(1.0, 1.0, 5.0) == "#d73027"
    assert score_color(5.0, 1.0, 5.0) == "#1a9850"
    assert score_color(3.0, 1.0, 5.0) == "#fee08b"
    assert score_color(9.0, 1.0, 5.0) == "#1a9850"
    assert score_color(2.0, 2.0, 2.0) == "#fee08b"
    assert score_color(None, 1.0, 5.0) == NO_SCORE_COLOR


def test_build_network_shares_endpoints():
    net = build_network([make_segment("a", [(0, 0), (100, 0)]), make_segment("b", [(100, 0), (100, 80)])])
    assert net.graph.number_of_nodes() == 3
    assert net.edge_count == 2
    assert net.edge_nodes["a"][1] == net.edge_nodes["b"][0]


def test_build_network_snap_tolerance():
    close = build_network([make_segment("a", [(0, 0), (100, 0)]), make_segment("b", [(100.5, 0), (200, 0)])])
    assert close.graph.number_of_nodes() == 3
    far = build_network([make_segment("a", [(0, 0), (100, 0)]), make_segment("b", [(105, 0), (200, 0)])])
    assert far.graph.number_of_nodes() == 4
    with pytest.raises(InvalidParameterError):
        build_network([], snap_tolerance=-1.0)


def test_build_network_ignores_input_order():
    segments = grid_segments(2)
    forward = build_network(segments)
    backward = build_network(list(reversed(segments)))
    assert forward.edge_nodes == backward.edge_nodes
    assert forward.nodes == backward.nodes


def test_walkhood_single_street():
    net = build_network([make_segment("a", [(0, 0), (1000, 0)])])
    result = walkhood(net, PlanarPoint(0, 10), minutes=5, speed=80)
    xs = [p.x for p in result.vertices]
    assert result.segment_id == "a"
    assert result.snap_distance == pytest.approx(10.0)
    assert result.budget == 400.0
    assert max(xs) - min(xs) == pytest.approx(400.0)
    assert len(result.vertices) == 2


def test_walkhood_cross_is_a_diamond(cross_segments):
    net = build_network(cross_segments)
    result = walkhood(net, PlanarPoint(0, 0), minutes=5, speed=80)
    vertices = sorted((round(p.x, 9), round(p.y, 9)) for p in result.vertices)
    assert vertices == sorted([(400.0, 0.0), (0.0, 400.0), (-400.0, 0.0), (0.0, -400.0)])
    assert result.geometry.area == pytest.approx(2 * 400.0 ** 2)
    ring = [(p.x, p.y) for p in result.vertices]
    signed_area = sum(x0 * y1 - x1 * y0 for (x0, y0), (x1, y1) in zip(ring, ring[1:] + ring[:1])) / 2
    assert signed_area == pytest.approx(2 * 400.0 ** 2)


def test_walkhood_crosses_intersections():
    net = build_network(grid_segments())
    result = walkhood(net, PlanarPoint(150, 100), minutes=2.5, speed=80)
    corner = next(n for n, p in net.nodes.items() if (p.x, p.y) == (100.0, 100.0))
    assert result.segment_id == "h11"
    assert result.node_distances[corner] == pytest.approx(50.0)
    assert result.geometry.area > 0


def test_walkhood_grows_with_budget():
    net = build_network(grid_segments())
    origin = PlanarPoint(130, 115)
    previous = None
    for minutes in (0.5, 1, 2, 3, 5, 8):
        current = walkhood(net, origin, minutes=minutes).geometry
        if previous is not None:
            assert current.buffer(1e-6).covers(previous)
        previous = current


def test_walkhood_errors():
    net = build_network([make_segment("a", [(0, 0), (1000, 0)])])
    with pytest.raises(UnreachableOriginError):
        walkhood(net, PlanarPoint(500, 150))
    with pytest.raises(InvalidParameterError):
        walkhood(net, PlanarPoint(0, 0), minutes=0)
    with pytest.raises(UnreachableOriginError):
        walkhood(build_network([]), PlanarPoint(0, 0))


def test_walkhood_feature(cross_segments, origin):
    net = build_network(cross_segments)
    result = walkhood(net, PlanarPoint(0, 0))
    feature = walkhood_feature(result, LocalProjection(origin))
    assert feature["geometry"]["type"] == "Polygon"
    ring = feature["geometry"]["coordinates"][0]
    assert len(ring) == 5 and ring[0] == ring[-1]
    assert feature["properties"]["budget_m"] == 400.0
    assert geojson.loads(geojson.dumps(feature)).is_valid


def random_streets(seed, n_nodes=20, size=1000.0):
    """Straight streets joining random points to their nearest neighbors."""
    rng = np.random.default_rng(seed)
    points = rng.uniform(0, size, (n_nodes, 2))
    pairs = set()
    for i, p in enumerate(points):
        nearest = np.argsort(np.hypot(*(points - p).T))[1:rng.integers(2, 5)]
        pairs.update(tuple(sorted((i, int(j)))) for j in nearest)
    return rng, [make_segment(f"e{i}_{j}", [points[i], points[j]]) for i, j in sorted(pairs)]


@pytest.mark.parametrize("seed", range(100))
def test_walkhood_is_monotone_in_budget_on_random_networks(seed):
    rng, segments = random_streets(seed)
    net = build_network(segments)
    start = segments[rng.integers(0, len(segments))].geometry.vertices
    origin = PlanarPoint((start[0].x + start[1].x) / 2 + rng.uniform(-5, 5), (start[0].y + start[1].y) / 2)
    previous = None
    for minutes in (0.5, 1, 2, 4, 8, 16):
        current = walkhood(net, origin, minutes=minutes)
        if previous is not None:
            assert set(previous.node_distances) <= set(current.node_distances)
            assert current.geometry.area >= previous.geometry.area - 1e-6
            assert current.geometry.buffer(1e-6).covers(previous.geometry)
        previous = current


@pytest.mark.parametrize("seed", range(10))
def test_street_distances_obey_triangle_inequality(seed):
    rng, segments = random_streets(1000 + seed)
    net = build_network(segments)
    distances = {n: net.node_distances(n) for n in net.nodes}
    for a, b, c in rng.integers(0, len(net.nodes), (300, 3)):
        a, b, c = int(a), int(b), int(c)
        if b in distances[a] and c in distances[b]:
            assert distances[a][c] <= distances[a][b] + distances[b][c] + 1e-9
        if b in distances[a]:
            straight = np.hypot(net.nodes[a].x - net.nodes[b].x, net.nodes[a].y - net.nodes[b].y)
            assert distances[a][b] >= straight - 1e-6
            assert distances[a][b] == pytest.approx(distances[b][a])
