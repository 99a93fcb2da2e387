import math

import numpy as np
import pytest

from tqs import (
    AngleGrid,
    AngleRandom,
    GaussianLine,
    Geometry,
    emit,
    make_stream,
)
from tqs.emission import IndexOutOfRangeError, grid_total

from conftest import REFERENCE_GRID

GEO = Geometry(5.0, 10.0, 5.0)


def test_reference_grid_total_is_9801():
    assert grid_total(REFERENCE_GRID) == 9801


def test_first_grid_state():
    stream = make_stream(REFERENCE_GRID, 12.0, GEO)
    s = emit(stream, 0)
    assert s.pos.x == -5.0 and s.pos.y == 0.0 and s.step == 0
    assert math.isclose(s.vel.x, 12.0 * math.cos(math.radians(-49.0)),
                        rel_tol=1e-12)
    assert math.isclose(s.vel.y, 12.0 * math.sin(math.radians(-49.0)),
                        rel_tol=1e-12)
    # the published four-decimal values
    assert abs(s.vel.x - 7.8727) < 1e-4
    assert abs(s.vel.y - -9.0567) < 1e-4


def test_axis_emission_is_exact():
    stream = make_stream(REFERENCE_GRID, 12.0, GEO)
    s = emit(stream, (stream.total - 1) // 2)
    assert s.vel.x == 12.0
    assert s.vel.y == 0.0
    assert s.pos == type(s.pos)(-5.0, 0.0)


def test_symmetric_grid_mirrors_exactly():
    stream = make_stream(REFERENCE_GRID, 12.0, GEO)
    n = stream.total
    for k in range(0, n, 97):
        a = emit(stream, k)
        b = emit(stream, n - 1 - k)
        assert a.vel.x == b.vel.x
        assert a.vel.y == -b.vel.y


def test_speed_within_one_ulp_of_v0():
    stream = make_stream(REFERENCE_GRID, 12.0, GEO)
    tol = math.ulp(12.0)
    worst = max(abs(math.hypot(emit(stream, k).vel.x, emit(stream, k).vel.y)
                    - 12.0)
                for k in range(stream.total))
    assert worst <= tol


def test_grid_spacing_matches_step():
    grid = AngleGrid(0.0, 1.0, 0.3)
    stream = make_stream(grid, 1.0, GEO)
    assert stream.total == 4
    angles = [math.atan2(emit(stream, k).vel.y, emit(stream, k).vel.x)
              for k in range(4)]
    assert angles[0] == pytest.approx(0.0, abs=1e-12)
    for k in range(3):
        assert angles[k + 1] - angles[k] == pytest.approx(0.3, rel=1e-9)


def test_random_emission_is_pure_in_index():
    spec = AngleRandom(-0.5, 0.5, 1000, seed=1234)
    stream = make_stream(spec, 12.0, GEO)
    again = make_stream(spec, 12.0, GEO)
    for k in (0, 1, 17, 999):
        assert emit(stream, k) == emit(again, k)
        assert emit(stream, k) == emit(stream, k)


def test_random_seed_changes_stream():
    a = make_stream(AngleRandom(-0.5, 0.5, 100, seed=1), 12.0, GEO)
    b = make_stream(AngleRandom(-0.5, 0.5, 100, seed=2), 12.0, GEO)
    assert any(emit(a, k) != emit(b, k) for k in range(100))


def test_random_angles_stay_in_window():
    spec = AngleRandom(0.0, 2.0 * math.pi, 5000, seed=99)
    stream = make_stream(spec, 12.0, GEO)
    for k in range(0, 5000, 7):
        s = emit(stream, k)
        angle = math.atan2(s.vel.y, s.vel.x) % (2.0 * math.pi)
        assert 0.0 <= angle < 2.0 * math.pi
        assert s.pos.y == 0.0


def test_gaussian_line_offsets_only_y():
    spec = GaussianLine(0.3, REFERENCE_GRID, seed=7)
    stream = make_stream(spec, 12.0, GEO)
    grid_stream = make_stream(REFERENCE_GRID, 12.0, GEO)
    s = emit(stream, 42)
    assert s.pos.x == -5.0
    assert s.pos.y != 0.0
    assert s.vel == emit(grid_stream, 42).vel


def test_gaussian_line_sample_mean():
    n = 100_000
    spec = GaussianLine(0.3, AngleRandom(-0.5, 0.5, n, seed=5), seed=11)
    stream = make_stream(spec, 12.0, GEO)
    ys = np.fromiter((emit(stream, k).pos.y for k in range(n)), dtype=float,
                     count=n)
    assert abs(ys.mean()) <= 5.0 * 0.3 / math.sqrt(n)
    assert abs(ys.std() - 0.3) < 0.01


def test_index_out_of_range():
    stream = make_stream(AngleGrid(-0.1, 0.1, 0.1), 12.0, GEO)
    with pytest.raises(IndexOutOfRangeError):
        emit(stream, stream.total)
    with pytest.raises(IndexOutOfRangeError):
        emit(stream, -1)
