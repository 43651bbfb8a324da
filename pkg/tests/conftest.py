from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from roomsmith.catalog import load_catalog
from roomsmith.geometry import RoomPolygon, WallFeature


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture(scope="session")
def catalog_ext():
    return load_catalog(allow_extensions=True)


@pytest.fixture
def square_room():
    return RoomPolygon([(0, 0), (4, 0), (4, 4), (0, 4)])


@pytest.fixture
def rect_room():
    """4 x 5 m room with a door on the bottom wall and a window on the right."""
    return RoomPolygon(
        [(0, 0), (4, 0), (4, 5), (0, 5)],
        features=(
            WallFeature("door", wall_index=0, start=1.0, end=1.9, swing_depth=0.9),
            WallFeature("window", wall_index=1, start=2.0, end=3.2),
        ),
    )


@pytest.fixture
def plain_rect_room():
    return RoomPolygon([(0, 0), (4, 0), (4, 5), (0, 5)])
