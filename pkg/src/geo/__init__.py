"""
Geometry package: projection, polylines and the spatial join index.
"""
from .projection import GeoPoint, PlanarPoint, LocalProjection, project, unproject, centroid
from .polyline import (
    DEFAULT_BUFFER_RADIUS,
    Polyline,
    point_to_polyline_distance,
    buffer_contains,
    locate_on_polyline,
)
from .index import SpatialIndex, build_index, match_point_all, match_points, nearest_segment

__all__ = [
    "GeoPoint",
    "PlanarPoint",
    "LocalProjection",
    "project",
    "unproject",
    "centroid",
    "DEFAULT_BUFFER_RADIUS",
    "Polyline",
    "point_to_polyline_distance",
    "buffer_contains",
    "locate_on_polyline",
    "SpatialIndex",
    "build_index",
    "match_point_all",
    "match_points",
    "nearest_segment",
]
