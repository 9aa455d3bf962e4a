"""
Planar polylines and point-to-polyline distance.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np

from ..core.errors import GeometryError, InvalidParameterError
from .projection import PlanarPoint

DEFAULT_BUFFER_RADIUS = 22.5


def piece_distances(px, py, ax, ay, bx, by) -> np.ndarray:
    """
    Distance from points to straight pieces a→b, elementwise with broadcasting.

    Every distance computation in the package goes through this function so
    that scalar and bulk matching agree bit for bit.
    """
    dx = bx - ax
    dy = by - ay
    wx = px - ax
    wy = py - ay
    t = np.clip((wx * dx + wy * dy) / (dx * dx + dy * dy), 0.0, 1.0)
    return np.hypot(wx - t * dx, wy - t * dy)


@dataclass(frozen=True)
class Polyline:
    """An ordered chain of at least two planar vertices."""
    vertices: Tuple[PlanarPoint, ...] = field()

    def __post_init__(self):
        vertices = tuple(self.vertices)
        object.__setattr__(self, "vertices", vertices)
        if len(vertices) < 2:
            raise GeometryError(
                "A polyline needs at least 2 vertices",
                "geo",
                {"vertex_count": len(vertices)}
            )
        for i in range(1, len(vertices)):
            if vertices[i] == vertices[i - 1]:
                raise GeometryError(
                    "Consecutive polyline vertices must differ",
                    "geo",
                    {"index": i, "x": vertices[i].x, "y": vertices[i].y}
                )

    @classmethod
    def from_coords(cls, coords: Sequence[Sequence[float]]) -> "Polyline":
        return cls(tuple(PlanarPoint(float(x), float(y)) for x, y in coords))

    @cached_property
    def coords(self) -> np.ndarray:
        return np.array([(v.x, v.y) for v in self.vertices], dtype=np.float64)

    @cached_property
    def piece_lengths(self) -> np.ndarray:
        return np.hypot(*np.diff(self.coords, axis=0).T)

    @cached_property
    def cumulative(self) -> np.ndarray:
        """Arc length at each vertex, starting at 0."""
        return np.concatenate(([0.0], np.cumsum(self.piece_lengths)))

    @property
    def length(self) -> float:
        return float(self.cumulative[-1])

    @property
    def start(self) -> PlanarPoint:
        return self.vertices[0]

    @property
    def end(self) -> PlanarPoint:
        return self.vertices[-1]

    def bounds(self) -> Tuple[float, float, float, float]:
        c = self.coords
        return float(c[:, 0].min()), float(c[:, 1].min()), float(c[:, 0].max()), float(c[:, 1].max())

    def reversed(self) -> "Polyline":
        return Polyline(tuple(reversed(self.vertices)))


def point_to_polyline_distance(p: PlanarPoint, line: Polyline) -> float:
    """
    Minimum Euclidean distance from p to any point of the polyline.

    Args:
        p: Query point
        line: Polyline

    Returns:
        float: Distance in meters, 0 iff p lies on the polyline
    """
    c = line.coords
    d = piece_distances(p.x, p.y, c[:-1, 0], c[:-1, 1], c[1:, 0], c[1:, 1])
    return float(d.min())


def buffer_contains(line: Polyline, p: PlanarPoint, radius: float = DEFAULT_BUFFER_RADIUS) -> bool:
    """
    Closed-buffer membership: distance(p, line) <= radius.

    Raises:
        InvalidParameterError: If radius is not positive
    """
    if not radius > 0:
        raise InvalidParameterError(
            f"Buffer radius must be positive, got {radius}",
            "geo",
            {"radius": radius}
        )
    return point_to_polyline_distance(p, line) <= radius


def locate_on_polyline(p: PlanarPoint, line: Polyline) -> Tuple[float, float]:
    """
    Nearest point of the polyline to p, as (distance, arc position).

    Ties between pieces resolve to the earliest piece.
    """
    c = line.coords
    ax, ay = c[:-1, 0], c[:-1, 1]
    dx, dy = c[1:, 0] - ax, c[1:, 1] - ay
    d = piece_distances(p.x, p.y, ax, ay, c[1:, 0], c[1:, 1])
    k = int(np.argmin(d))
    t = ((p.x - ax[k]) * dx[k] + (p.y - ay[k]) * dy[k]) / (dx[k] * dx[k] + dy[k] * dy[k])
    t = min(max(t, 0.0), 1.0)
    return float(d[k]), float(line.cumulative[k] + t * line.piece_lengths[k])


def interpolate(line: Polyline, s: float) -> PlanarPoint:
    """Point at arc position s, clamped to [0, length]."""
    s = min(max(s, 0.0), line.length)
    cum = line.cumulative
    k = int(np.searchsorted(cum, s, side="right")) - 1
    k = min(max(k, 0), len(line.piece_lengths) - 1)
    t = (s - cum[k]) / line.piece_lengths[k]
    a = line.coords[k]
    b = line.coords[k + 1]
    return PlanarPoint(float(a[0] + (b[0] - a[0]) * t), float(a[1] + (b[1] - a[1]) * t))


def substring_points(line: Polyline, s0: float, s1: float) -> List[PlanarPoint]:
    """Vertices of the sub-polyline between arc positions s0 <= s1, endpoints included."""
    s0 = min(max(s0, 0.0), line.length)
    s1 = min(max(s1, s0), line.length)
    points = [interpolate(line, s0)]
    cum = line.cumulative
    for k in range(len(cum)):
        if s0 < cum[k] < s1:
            points.append(line.vertices[k])
    points.append(interpolate(line, s1))
    return points

