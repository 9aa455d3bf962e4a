"""
Street network graph and the WalkHood reachability polygon.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import geojson
import networkx as nx
import numpy as np
from scipy.spatial import cKDTree
from shapely.geometry import LineString, MultiPoint, Polygon
from shapely.geometry.base import BaseGeometry

from ..core.errors import InvalidParameterError, UnreachableOriginError
from ..geo.index import SpatialIndex, build_index, nearest_segment
from ..geo.polyline import Polyline, interpolate, locate_on_polyline, substring_points
from ..geo.projection import LocalProjection, PlanarPoint
from ..model.types import StreetSegment

logger = logging.getLogger(__name__)

DEFAULT_SNAP_TOLERANCE = 1.0
DEFAULT_WALK_SPEED = 80.0
DEFAULT_WALK_MINUTES = 5.0
MAX_ORIGIN_DISTANCE = 100.0


@dataclass
class StreetNetwork:
    """Undirected multigraph: one node per snapped endpoint cluster, one edge per segment."""
    graph: nx.MultiGraph
    nodes: Dict[int, PlanarPoint]
    lines: Dict[str, Polyline]
    edge_nodes: Dict[str, Tuple[int, int]]
    index: Optional[SpatialIndex] = None

    @property
    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    def node_distances(self, source: int, cutoff: Optional[float] = None) -> Dict[int, float]:
        """Shortest along-street distance from a node to every node within cutoff."""
        return nx.single_source_dijkstra_path_length(self.graph, source, cutoff=cutoff, weight="length")


def build_network(segments: Sequence[StreetSegment], snap_tolerance: float = DEFAULT_SNAP_TOLERANCE) -> StreetNetwork:
    """
    Build the street graph, merging endpoints within snap_tolerance.

    Merging is transitive: chains of endpoints each within tolerance of the
    next form one node, placed at the mean of its members. Node ids follow
    the sorted node coordinates, so the result does not depend on input order.

    Args:
        segments: Street segments
        snap_tolerance: Endpoint merge distance in meters (>= 0)

    Returns:
        StreetNetwork: Graph with edge attribute "length" in meters
    """
    if not snap_tolerance >= 0:
        raise InvalidParameterError(
            f"Snap tolerance must be >= 0, got {snap_tolerance}", "walkhood", {"snap_tolerance": snap_tolerance}
        )
    graph = nx.MultiGraph()
    if not segments:
        return StreetNetwork(graph=graph, nodes={}, lines={}, edge_nodes={})

    endpoints = np.array(
        [(p.x, p.y) for s in segments for p in (s.geometry.start, s.geometry.end)], dtype=np.float64
    )
    links = nx.Graph()
    links.add_nodes_from(range(len(endpoints)))
    links.add_edges_from(cKDTree(endpoints).query_pairs(r=snap_tolerance))

    clusters = []
    for members in nx.connected_components(links):
        coords = sorted(map(tuple, endpoints[sorted(members)]))
        position = tuple(np.mean(np.array(coords), axis=0))
        clusters.append((position, members))
    clusters.sort(key=lambda c: c[0])

    endpoint_node = np.empty(len(endpoints), dtype=np.int64)
    nodes: Dict[int, PlanarPoint] = {}
    for node_id, (position, members) in enumerate(clusters):
        nodes[node_id] = PlanarPoint(float(position[0]), float(position[1]))
        graph.add_node(node_id, x=nodes[node_id].x, y=nodes[node_id].y)
        endpoint_node[list(members)] = node_id

    lines: Dict[str, Polyline] = {}
    edge_nodes: Dict[str, Tuple[int, int]] = {}
    for i, segment in enumerate(segments):
        u, v = int(endpoint_node[2 * i]), int(endpoint_node[2 * i + 1])
        lines[segment.id] = segment.geometry
        edge_nodes[segment.id] = (u, v)
        graph.add_edge(u, v, key=segment.id, length=segment.geometry.length)

    index = build_index([(s.id, s.geometry) for s in segments])
    logger.info("Street network: %d nodes, %d edges", graph.number_of_nodes(), graph.number_of_edges())
    return StreetNetwork(graph=graph, nodes=nodes, lines=lines, edge_nodes=edge_nodes, index=index)


@dataclass
class Walkhood:
    """Convex hull of everything reachable within the walking budget."""
    vertices: List[PlanarPoint]
    geometry: BaseGeometry
    snap_point: PlanarPoint
    segment_id: str
    snap_distance: float
    budget: float
    minutes: float
    speed: float
    node_distances: Dict[int, float] = field(default_factory=dict)


def walkhood(
    net: StreetNetwork,
    origin: PlanarPoint,
    minutes: float = DEFAULT_WALK_MINUTES,
    speed: float = DEFAULT_WALK_SPEED,
) -> Walkhood:
    """
    Area reachable on foot from origin within minutes at speed.

    The origin is snapped to its nearest street. Distances run along streets,
    partial streets included up to the remaining budget, and the reachable
    points are summarized by their convex hull.

    Args:
        net: Street network
        origin: Planar start point
        minutes: Time budget (> 0)
        speed: Walking speed in meters per minute (> 0)

    Returns:
        Walkhood: Hull vertices in counter-clockwise order; a degenerate hull
        (a single street stretch, or the snap point) keeps its line or point vertices

    Raises:
        InvalidParameterError: If minutes or speed is not positive
        UnreachableOriginError: If origin is more than 100 m from every street
    """
    if not minutes > 0 or not speed > 0:
        raise InvalidParameterError(
            "Walk minutes and speed must be positive", "walkhood", {"minutes": minutes, "speed": speed}
        )
    if net.index is None:
        raise UnreachableOriginError("The street network has no edges", "walkhood")
    budget = minutes * speed

    segment_id = nearest_segment(net.index, net.lines, origin)
    line = net.lines[segment_id]
    distance, s = locate_on_polyline(origin, line)
    if distance > MAX_ORIGIN_DISTANCE:
        raise UnreachableOriginError(
            f"Origin is {distance:.1f} m from the nearest street (limit {MAX_ORIGIN_DISTANCE} m)",
            "walkhood",
            {"distance": distance, "segment_id": segment_id}
        )

    u, v = net.edge_nodes[segment_id]
    length = line.length
    dist: Dict[int, float] = {}
    for node, offset in ((u, s), (v, length - s)):
        if offset <= budget:
            for n, d in net.node_distances(node, cutoff=budget - offset).items():
                total = offset + d
                if total <= budget and total < dist.get(n, float("inf")):
                    dist[n] = total

    points = substring_points(line, max(0.0, s - budget), min(length, s + budget))
    for _, _, key in net.graph.edges(keys=True):
        edge_line = net.lines[key]
        start, end = net.edge_nodes[key]
        edge_length = edge_line.length
        if start in dist:
            reach = min(budget - dist[start], edge_length)
            points.extend(substring_points(edge_line, 0.0, reach))
        if end in dist:
            reach = min(budget - dist[end], edge_length)
            points.extend(substring_points(edge_line, edge_length - reach, edge_length))

    hull = MultiPoint([(p.x, p.y) for p in points]).convex_hull
    if isinstance(hull, Polygon):
        coords = list(hull.exterior.coords)[:-1]
        if hull.exterior.is_ccw is False:
            coords.reverse()
    elif isinstance(hull, LineString):
        coords = list(hull.coords)
    else:
        coords = [hull.coords[0]]

    return Walkhood(
        vertices=[PlanarPoint(float(x), float(y)) for x, y in coords],
        geometry=hull,
        snap_point=interpolate(line, s),
        segment_id=segment_id,
        snap_distance=distance,
        budget=budget,
        minutes=minutes,
        speed=speed,
        node_distances=dist,
    )


def walkhood_feature(result: Walkhood, projection: LocalProjection, precision: int = 7) -> geojson.Feature:
    """GeoJSON feature of a walkhood in lon/lat: Polygon, or LineString/Point when degenerate."""
    ring = [projection.unproject(p) for p in result.vertices]
    coords = [[g.lon, g.lat] for g in ring]
    if len(coords) >= 3:
        geometry = geojson.Polygon([coords + [coords[0]]], precision=precision)
    elif len(coords) == 2:
        geometry = geojson.LineString(coords, precision=precision)
    else:
        geometry = geojson.Point(coords[0], precision=precision)
    return geojson.Feature(
        geometry=geometry,
        properties={
            "minutes": result.minutes,
            "speed_m_per_min": result.speed,
            "budget_m": result.budget,
            "segment_id": result.segment_id,
            "snap_distance_m": result.snap_distance,
        },
    )
