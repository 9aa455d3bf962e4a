"""
Local equirectangular projection between lon/lat degrees and planar meters.
"""
import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from ..core.errors import InvalidCoordinateError, EmptyInputError

EARTH_RADIUS_M = 6_371_008.8
MAX_ABS_LATITUDE = 85.0


@dataclass(frozen=True)
class GeoPoint:
    """A lon/lat position in degrees."""
    lon: float
    lat: float

    def __post_init__(self):
        if not (math.isfinite(self.lon) and math.isfinite(self.lat)):
            raise InvalidCoordinateError(
                "Coordinates must be finite",
                "geo",
                {"lon": repr(self.lon), "lat": repr(self.lat)}
            )
        if not -180.0 <= self.lon <= 180.0 or not -90.0 <= self.lat <= 90.0:
            raise InvalidCoordinateError(
                f"Coordinate out of range: ({self.lon}, {self.lat})",
                "geo",
                {"lon": self.lon, "lat": self.lat}
            )


@dataclass(frozen=True)
class PlanarPoint:
    """Meters east (x) and north (y) of a projection origin."""
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidCoordinateError(
                "Planar coordinates must be finite",
                "geo",
                {"x": repr(self.x), "y": repr(self.y)}
            )


def _check_latitude(lat: float) -> None:
    if abs(lat) >= MAX_ABS_LATITUDE:
        raise InvalidCoordinateError(
            f"Latitude {lat} outside the equirectangular domain (|lat| < {MAX_ABS_LATITUDE})",
            "geo",
            {"lat": lat}
        )


class LocalProjection:
    """
    Equirectangular projection about a fixed origin.

    x = R·(lon−lon₀)·(π/180)·cos(lat₀), y = R·(lat−lat₀)·(π/180).
    """
    def __init__(self, origin: GeoPoint):
        _check_latitude(origin.lat)
        self.origin = origin
        self._kx = EARTH_RADIUS_M * (math.pi / 180.0) * math.cos(origin.lat * math.pi / 180.0)
        self._ky = EARTH_RADIUS_M * (math.pi / 180.0)

    def project(self, p: GeoPoint) -> PlanarPoint:
        _check_latitude(p.lat)
        return PlanarPoint(
            x=self._kx * (p.lon - self.origin.lon),
            y=self._ky * (p.lat - self.origin.lat),
        )

    def unproject(self, q: PlanarPoint) -> GeoPoint:
        return GeoPoint(
            lon=self.origin.lon + q.x / self._kx,
            lat=self.origin.lat + q.y / self._ky,
        )

    def project_arrays(self, lons: np.ndarray, lats: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Vectorised project; inputs are validated by the caller."""
        lons = np.asarray(lons, dtype=np.float64)
        lats = np.asarray(lats, dtype=np.float64)
        if lats.size and np.any(np.abs(lats) >= MAX_ABS_LATITUDE):
            raise InvalidCoordinateError(
                "Latitude outside the equirectangular domain",
                "geo",
                {"max_abs_lat": float(np.max(np.abs(lats)))}
            )
        return self._kx * (lons - self.origin.lon), self._ky * (lats - self.origin.lat)

    def unproject_arrays(self, xs: np.ndarray, ys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        return self.origin.lon + xs / self._kx, self.origin.lat + ys / self._ky


def project(p: GeoPoint, origin: GeoPoint) -> PlanarPoint:
    """
    Project a lon/lat point to planar meters about origin.

    Args:
        p: Point to project
        origin: Projection origin

    Returns:
        PlanarPoint: Meters east/north of origin

    Raises:
        InvalidCoordinateError: If either latitude is outside |lat| < 85
    """
    return LocalProjection(origin).project(p)


def unproject(q: PlanarPoint, origin: GeoPoint) -> GeoPoint:
    """Inverse of project for the same origin."""
    return LocalProjection(origin).unproject(q)


def centroid(points: Iterable[GeoPoint]) -> GeoPoint:
    """
    Mean lon/lat of a point set, used as the projection origin of a dataset.

    Raises:
        EmptyInputError: If no points are given
    """
    lons, lats = [], []
    for p in points:
        lons.append(p.lon)
        lats.append(p.lat)
    if not lons:
        raise EmptyInputError("Cannot compute the centroid of no points", "geo")
    return GeoPoint(lon=math.fsum(lons) / len(lons), lat=math.fsum(lats) / len(lats))
