import os
import sys
from typing import Optional, Sequence

import pytest

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.geo.polyline import Polyline
from src.geo.projection import GeoPoint, LocalProjection
from src.model.types import CategoryRatings, StreetSegment

LONDON = GeoPoint(-0.1276, 51.5072)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: large acceptance runs (deselect with -m 'not slow')")


def make_segment(
    segment_id: str,
    coords: Sequence[Sequence[float]],
    walkability: Optional[float] = None,
    safety: Optional[float] = None,
    ratings: Optional[CategoryRatings] = None,
    origin: GeoPoint = LONDON,
) -> StreetSegment:
    """Segment from planar coordinates, with lon/lat filled in about origin."""
    line = Polyline.from_coords(coords)
    projection = LocalProjection(origin)
    return StreetSegment(
        id=segment_id,
        geometry=line,
        coordinates=tuple(projection.unproject(p) for p in line.vertices),
        walkability=walkability,
        safety=safety,
        ratings=ratings,
    )


@pytest.fixture
def origin():
    return LONDON


@pytest.fixture
def projection():
    return LocalProjection(LONDON)


@pytest.fixture
def cross_segments():
    """Four 500 m arms meeting at the origin."""
    return [
        make_segment("e", [(0, 0), (500, 0)]),
        make_segment("n", [(0, 0), (0, 500)]),
        make_segment("w", [(0, 0), (-500, 0)]),
        make_segment("s", [(0, 0), (0, -500)]),
    ]
