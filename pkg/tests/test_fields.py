import math

import pytest
from hypothesis import given, strategies as st

from tqs import (
    BandConstant,
    GaussianBand,
    HalfPlaneConstant,
    Vec2,
    ZeroField,
    eval_field,
)

F0 = 2.0 * math.pi * -1.0


def test_band_inside_returns_amplitude():
    f = eval_field(BandConstant(F0, 0.5), Vec2(0.3, 7.2))
    assert f.x == F0
    assert f.y == 0.0


def test_band_outside_is_zero():
    f = eval_field(BandConstant(-2.0 * math.pi, 0.5), Vec2(0.6, 0.0))
    assert f == Vec2(0.0, 0.0)


@pytest.mark.parametrize("x", [0.5, -0.5])
def test_band_boundary_is_closed(x):
    assert eval_field(BandConstant(F0, 0.5), Vec2(x, 1.0)).x == F0


def test_half_plane_negative_side_is_zero():
    assert eval_field(HalfPlaneConstant(1.0), Vec2(-0.001, 0.0)) == Vec2(0.0, 0.0)


def test_half_plane_boundary_is_closed():
    assert eval_field(HalfPlaneConstant(1.0), Vec2(0.0, -3.0)).x == 1.0


def test_gaussian_band_value():
    # F0 * exp(-sigma x^2) at x = 0.5, sigma = 4 is exactly exp(-1).
    f = eval_field(GaussianBand(1.0, 4.0), Vec2(0.5, 123.0))
    assert f.x == math.exp(-1.0)
    assert abs(f.x - 0.367879441171442) < 1e-12


def test_zero_field():
    assert eval_field(ZeroField(), Vec2(3.0, -2.0)) == Vec2(0.0, 0.0)


_SPECS = [
    ZeroField(),
    HalfPlaneConstant(-1.25),
    BandConstant(F0, 0.5),
    GaussianBand(2.0, 3.0),
]


@given(x=st.floats(-20, 20), y1=st.floats(-50, 50), y2=st.floats(-50, 50))
def test_force_never_depends_on_y(x, y1, y2):
    for spec in _SPECS:
        assert eval_field(spec, Vec2(x, y1)) == eval_field(spec, Vec2(x, y2))


@given(x=st.floats(-20, 20))
def test_force_has_no_vertical_component(x):
    for spec in _SPECS:
        assert eval_field(spec, Vec2(x, 1.0)).y == 0.0


@given(x=st.floats(-20, 20))
def test_gaussian_band_is_even(x):
    spec = GaussianBand(1.7, 2.3)
    assert eval_field(spec, Vec2(x, 0.0)) == eval_field(spec, Vec2(-x, 0.0))
