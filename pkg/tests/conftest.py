import math
from pathlib import Path

import pytest

from tqs import (
    AngleGrid,
    BandConstant,
    Geometry,
    HalfPlaneConstant,
    SimConfig,
)

REPO_ROOT = Path(__file__).resolve().parents[1]

REFERENCE_F0 = 2.0 * math.pi * -1.0  # charge q = -1
REFERENCE_GRID = AngleGrid(math.radians(-49.0), math.radians(49.0),
                           math.radians(0.01))


def reference_config(**overrides) -> SimConfig:
    """The canonical run: band force around the slit, dense angle grid."""
    base = dict(
        geometry=Geometry(5.0, 10.0, 5.0),
        field=BandConstant(REFERENCE_F0, 0.5),
        emission=REFERENCE_GRID,
        tau=0.025,
        v0=12.0,
        mass=1.0,
    )
    base.update(overrides)
    return SimConfig(**base)


def half_plane_config(d: float, **overrides) -> SimConfig:
    return reference_config(geometry=Geometry(d, 10.0, 5.0),
                            field=HalfPlaneConstant(REFERENCE_F0),
                            **overrides)


@pytest.fixture
def appendix_cfg() -> SimConfig:
    return reference_config()


@pytest.fixture
def coarse_cfg() -> SimConfig:
    """Same physics on a 981-particle grid; fast enough for unit tests."""
    return reference_config(
        emission=AngleGrid(math.radians(-49.0), math.radians(49.0),
                           math.radians(0.1)))


@pytest.fixture
def repo_root() -> Path:
    return REPO_ROOT
