import math

import numpy as np
import pytest

from tqs import (
    BandConstant,
    GaussianBand,
    HalfPlaneConstant,
    MaxStepsExceeded,
    NonFiniteState,
    ParticleState,
    SimConfig,
    SlitAbsorbed,
    Vec2,
    ZeroField,
    propagate_to_detector,
    record_trajectory,
    step,
)
from tqs.dynamics import impact_of

from conftest import reference_config, half_plane_config

F0 = 2.0 * math.pi * -1.0


def launched(alpha: float, v0: float = 12.0, d: float = 5.0) -> ParticleState:
    return ParticleState(Vec2(-d, 0.0),
                         Vec2(v0 * math.cos(alpha), v0 * math.sin(alpha)), 0)


# --- single step -------------------------------------------------------------

def test_step_inside_band_reference_values():
    state = ParticleState(Vec2(0.0, 0.0), Vec2(12.0, 0.0), 0)
    out = step(state, BandConstant(F0, 0.5), 0.025, 1.0)
    assert out.pos.x == 12.0 * 0.025          # position from the old velocity
    assert out.pos.y == 0.0
    assert out.vel.x == 12.0 + F0 * 0.025 / 1.0
    assert math.isclose(out.vel.x, 11.842920367320511, rel_tol=1e-15)
    assert out.vel.y == 0.0
    assert out.step == 1


def test_step_zero_field_is_free_motion():
    state = ParticleState(Vec2(1.0, 2.0), Vec2(3.0, -4.0), 5)
    out = step(state, ZeroField(), 0.5, 2.0)
    assert out.pos == Vec2(1.0 + 3.0 * 0.5, 2.0 + -4.0 * 0.5)
    assert out.vel == state.vel
    assert out.step == 6


def test_step_outside_band_leaves_velocity_alone():
    state = ParticleState(Vec2(-5.0, 0.0), Vec2(12.0, 0.0), 0)
    out = step(state, BandConstant(F0, 0.5), 0.025, 1.0)
    assert out.vel == state.vel


def test_step_mass_divides_the_kick():
    state = ParticleState(Vec2(0.0, 0.0), Vec2(12.0, 0.0), 0)
    out = step(state, BandConstant(F0, 0.5), 0.025, 4.0)
    assert out.vel.x == 12.0 + F0 * 0.025 / 4.0


# --- propagation -------------------------------------------------------------

def test_zero_field_impact_matches_straight_line():
    cfg = reference_config(field=ZeroField())
    alpha = math.radians(10.0)
    imp = propagate_to_detector(launched(alpha), cfg)
    assert abs(imp.y_impact - 15.0 * math.tan(alpha)) < 1e-12


def test_axial_impact_is_exactly_zero():
    cfg = reference_config(field=ZeroField())
    assert propagate_to_detector(launched(0.0), cfg).y_impact == 0.0


def test_band_axial_impact_is_exactly_zero(appendix_cfg):
    assert propagate_to_detector(launched(0.0), appendix_cfg).y_impact == 0.0


def test_coarse_sweep_completes_without_failures(coarse_cfg):
    from tqs import emit, make_stream
    stream = make_stream(coarse_cfg.emission, coarse_cfg.v0,
                         coarse_cfg.geometry)
    assert stream.total == 981
    for k in range(stream.total):
        propagate_to_detector(emit(stream, k), coarse_cfg)


def test_mirror_trajectories_give_negated_impacts(appendix_cfg):
    for deg in (0.37, 5.0, 12.34, 30.0, 48.99):
        alpha = math.radians(deg)
        up = propagate_to_detector(launched(alpha), appendix_cfg)
        down = propagate_to_detector(launched(-alpha), appendix_cfg)
        assert down.y_impact == -up.y_impact
        assert down.steps_taken == up.steps_taken


# --- recorded trajectories ----------------------------------------------------

def test_free_trajectory_walks_the_lattice():
    cfg = reference_config(field=ZeroField())
    traj = record_trajectory(launched(0.0), cfg)
    step_len = 12.0 * 0.025
    for k, (x, y) in enumerate(traj.points):
        assert y == 0.0
        assert math.isclose(x, -5.0 + step_len * k, rel_tol=1e-12,
                            abs_tol=1e-12)


def test_trajectory_starts_at_initial_position(appendix_cfg):
    initial = launched(math.radians(7.0))
    traj = record_trajectory(initial, appendix_cfg)
    assert traj.points[0, 0] == initial.pos.x
    assert traj.points[0, 1] == initial.pos.y


def test_trajectory_length_is_steps_plus_one(appendix_cfg):
    initial = launched(math.radians(7.0))
    traj = record_trajectory(initial, appendix_cfg)
    imp = propagate_to_detector(initial, appendix_cfg)
    assert len(traj.points) == imp.steps_taken + 1
    assert traj.points[-1, 0] > appendix_cfg.geometry.l
    assert traj.points[-2, 0] <= appendix_cfg.geometry.l


def test_free_flight_points_lie_on_source_circles(appendix_cfg):
    traj = record_trajectory(launched(math.radians(30.0)), appendix_cfg)
    step_len = 12.0 * 0.025
    for k, (x, y) in enumerate(traj.points):
        if x >= -0.5:
            break
        radius = math.hypot(x - -5.0, y - 0.0)
        if k:
            assert abs(radius - step_len * k) / (step_len * k) < 1e-9


def test_recorded_impact_matches_direct_propagation(appendix_cfg):
    initial = launched(math.radians(21.7))
    direct = propagate_to_detector(initial, appendix_cfg, 3)
    traj = record_trajectory(initial, appendix_cfg)
    derived = impact_of(traj, appendix_cfg.geometry.l, 3)
    assert derived == direct


# --- kernel / reference-step equivalence ---------------------------------------

def _positions_by_single_steps(initial, cfg):
    st = initial
    pts = [(st.pos.x, st.pos.y)]
    while st.pos.x <= cfg.geometry.l:
        st = step(st, cfg.field, cfg.tau, cfg.mass)
        pts.append((st.pos.x, st.pos.y))
    return np.asarray(pts)


@pytest.mark.parametrize("field", [
    ZeroField(),
    HalfPlaneConstant(F0),
    BandConstant(F0, 0.5),
    GaussianBand(-3.0, 4.0),
])
def test_propagation_kernel_is_bit_identical_to_single_steps(field):
    cfg = reference_config(field=field)
    initial = launched(math.radians(9.5))
    expected = _positions_by_single_steps(initial, cfg)
    recorded = record_trajectory(initial, cfg).points
    assert np.array_equal(expected, recorded)


def test_slit_kernel_matches_plain_kernel_when_everything_passes():
    open_cfg = reference_config()
    gated = reference_config(slit_half_width=50.0)
    initial = launched(math.radians(17.0))
    assert np.array_equal(record_trajectory(initial, open_cfg).points,
                          record_trajectory(initial, gated).points)


# --- error paths ---------------------------------------------------------------

def test_strong_opposing_field_reflects_and_raises():
    cfg = half_plane_config(5.0)
    with pytest.raises(MaxStepsExceeded):
        propagate_to_detector(launched(math.radians(40.0)), cfg)


def test_backward_emission_never_reaches_detector(appendix_cfg):
    with pytest.raises(MaxStepsExceeded):
        propagate_to_detector(launched(math.radians(180.0)), appendix_cfg)


def test_divergent_state_raises_non_finite():
    # the in-band kick F0 * tau / m overflows to inf for this mass
    cfg = reference_config(field=BandConstant(1e308, 0.5), mass=1e-3)
    with pytest.raises(NonFiniteState):
        propagate_to_detector(launched(0.0), cfg)


def test_single_step_detects_non_finite():
    state = ParticleState(Vec2(0.0, 0.0), Vec2(1e308, 0.0), 0)
    with pytest.raises(NonFiniteState):
        step(step(state, HalfPlaneConstant(1e308), 1e300, 1.0),
             HalfPlaneConstant(1e308), 1e300, 1.0)


def test_slit_absorbs_wide_trajectories():
    cfg = reference_config(slit_half_width=0.2)
    with pytest.raises(SlitAbsorbed):
        propagate_to_detector(launched(math.radians(30.0)), cfg)
    # the axial ray passes through the middle of the slit
    assert propagate_to_detector(launched(0.0), cfg).y_impact == 0.0


def test_default_slit_is_non_absorbing(appendix_cfg):
    propagate_to_detector(launched(math.radians(48.0)), appendix_cfg)
