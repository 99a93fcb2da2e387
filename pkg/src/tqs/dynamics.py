"""Discrete-time integrator.

One step of the dynamics, with time quant tau:

    F       = field(position before the step)
    pos(t+tau) = pos(t) + vel(t) * tau      (old velocity)
    vel(t+tau) = vel(t) + F * tau / m

The update order is normative: force from the old position, position from
the old velocity.  tau is part of the physics, not an accuracy knob, so no
higher-order or adaptive scheme belongs here.

A particle is propagated while pos.x <= l; the final segment (the first one
ending past the detector plane) is linearly interpolated back to x = l to
produce the impact ordinate.

`step` is the readable single-step reference.  The batch kernels below
inline the same arithmetic, operation for operation, so that a propagated
trajectory is bit-identical to repeated `step` calls (tests pin this).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import eval_field
from .model import (
    BandConstant,
    FieldSpec,
    GaussianBand,
    HalfPlaneConstant,
    ParticleState,
    SimConfig,
    Vec2,
    ZeroField,
    resolved_max_steps,
)


class SimulationError(Exception):
    pass


class MaxStepsExceeded(SimulationError):
    """The particle never crossed x = l within the step budget (reflected or
    stalled by an opposing field, or emitted away from the detector)."""


class NonFiniteState(SimulationError):
    """A state component overflowed to inf or became NaN."""


class SlitAbsorbed(SimulationError):
    """The trajectory hit screen S1 outside the open slit (only raised when
    the optional absorbing slit is enabled)."""


@dataclass(frozen=True)
class ImpactRecord:
    """Detector-plane crossing: ordinate interpolated at exactly x = l."""

    y_impact: float
    emission_index: int
    steps_taken: int


@dataclass(frozen=True)
class Trajectory:
    """All visited positions, including the initial one and the first
    position past the detector plane; shape (steps_taken + 1, 2)."""

    points: np.ndarray


def step(state: ParticleState, field: FieldSpec, tau: float,
         mass: float) -> ParticleState:
    """Advance a single time quant."""
    f = eval_field(field, state.pos)
    pos = Vec2(state.pos.x + state.vel.x * tau, state.pos.y + state.vel.y * tau)
    vel = Vec2(state.vel.x + f.x * tau / mass, state.vel.y + f.y * tau / mass)
    if not (math.isfinite(pos.x) and math.isfinite(pos.y)
            and math.isfinite(vel.x) and math.isfinite(vel.y)):
        raise NonFiniteState(f"state diverged at step {state.step + 1}")
    return ParticleState(pos, vel, state.step + 1)


def _raise_stuck(x: float, y: float, vx: float, steps: int) -> None:
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(vx)):
        raise NonFiniteState(f"state diverged within {steps} steps")
    raise MaxStepsExceeded(f"no detector crossing within {steps} steps")


def _advance(initial: ParticleState, cfg: SimConfig, record: Optional[list]):
    """Shared propagation kernel.

    Returns (x, y, x_prev, y_prev, steps) where (x, y) is the first position
    past the detector plane and (x_prev, y_prev) the one before it.  When
    `record` is a list, every visited position is appended to it.

    The loop bodies are specialized per field variant to keep the hot path
    free of dispatch; each body replicates the arithmetic of `step` exactly.
    """
    x = initial.pos.x
    y = initial.pos.y
    vx = initial.vel.x
    vy = initial.vel.y
    steps = initial.step
    tau = cfg.tau
    mass = cfg.mass
    l = cfg.geometry.l
    max_steps = initial.step + resolved_max_steps(cfg)
    field = cfg.field
    xp = x
    yp = y
    if record is not None:
        record.append((x, y))

    slit = cfg.slit_half_width

    if slit is None and isinstance(field, ZeroField):
        dx = vx * tau
        dy = vy * tau
        while x <= l:
            if steps >= max_steps:
                _raise_stuck(x, y, vx, steps)
            xp = x
            yp = y
            x += dx
            y += dy
            steps += 1
            if record is not None:
                record.append((x, y))
    elif slit is None and isinstance(field, BandConstant):
        f0 = field.F0
        delta = field.delta
        dv = f0 * tau / mass
        while x <= l:
            if steps >= max_steps:
                _raise_stuck(x, y, vx, steps)
            xp = x
            yp = y
            x += vx * tau
            y += vy * tau
            if -delta <= xp <= delta:
                vx += dv
            steps += 1
            if record is not None:
                record.append((x, y))
    elif slit is None and isinstance(field, HalfPlaneConstant):
        dv = field.F0 * tau / mass
        while x <= l:
            if steps >= max_steps:
                _raise_stuck(x, y, vx, steps)
            xp = x
            yp = y
            x += vx * tau
            y += vy * tau
            if xp >= 0.0:
                vx += dv
            steps += 1
            if record is not None:
                record.append((x, y))
    elif slit is None and isinstance(field, GaussianBand):
        f0 = field.F0
        sigma = field.sigma
        while x <= l:
            if steps >= max_steps:
                _raise_stuck(x, y, vx, steps)
            fx = f0 * math.exp(-sigma * x * x)
            xp = x
            yp = y
            x += vx * tau
            y += vy * tau
            vx += fx * tau / mass
            steps += 1
            if record is not None:
                record.append((x, y))
    else:
        # Absorbing slit enabled: generic loop with an S1-crossing test.
        spec = field
        while x <= l:
            if steps >= max_steps:
                _raise_stuck(x, y, vx, steps)
            if isinstance(spec, ZeroField):
                fx = 0.0
            elif isinstance(spec, HalfPlaneConstant):
                fx = spec.F0 if x >= 0.0 else 0.0
            elif isinstance(spec, BandConstant):
                fx = spec.F0 if abs(x) <= spec.delta else 0.0
            else:
                fx = spec.F0 * math.exp(-spec.sigma * x * x)
            xp = x
            yp = y
            x += vx * tau
            y += vy * tau
            vx += fx * tau / mass
            steps += 1
            if record is not None:
                record.append((x, y))
            if slit is not None and xp < 0.0 <= x:
                y_cross = (y - yp) * (0.0 - xp) / (x - xp) + yp
                if abs(y_cross) > slit:
                    raise SlitAbsorbed(
                        f"hit S1 at y = {y_cross} (slit half-width {slit})")

    if not (math.isfinite(x) and math.isfinite(y)):
        raise NonFiniteState(f"state diverged within {steps} steps")
    # Loop exit guarantees x > l >= xp, so the final segment is never
    # degenerate under this scheme.
    assert x > xp, "exit segment must advance in x"
    return x, y, xp, yp, steps


def _interpolate_impact(x: float, y: float, xp: float, yp: float,
                        l: float) -> float:
    return (y - yp) * (l - xp) / (x - xp) + yp


def propagate_to_detector(initial: ParticleState, cfg: SimConfig,
                          emission_index: int = 0) -> ImpactRecord:
    """Run the discrete dynamics until the trajectory crosses the detector
    plane and interpolate the crossing ordinate."""
    x, y, xp, yp, steps = _advance(initial, cfg, None)
    y_impact = _interpolate_impact(x, y, xp, yp, cfg.geometry.l)
    if not math.isfinite(y_impact):
        raise NonFiniteState("impact interpolation diverged")
    return ImpactRecord(y_impact, emission_index, steps)


def record_trajectory(initial: ParticleState, cfg: SimConfig) -> Trajectory:
    """As propagate_to_detector, but keep every intermediate position."""
    points: list = []
    _advance(initial, cfg, points)
    return Trajectory(np.asarray(points, dtype=float))


def impact_of(trajectory: Trajectory, l: float, emission_index: int = 0,
              start_step: int = 0) -> ImpactRecord:
    """Impact record derived from a recorded trajectory's last segment."""
    (xp, yp), (x, y) = trajectory.points[-2], trajectory.points[-1]
    steps = start_step + len(trajectory.points) - 1
    return ImpactRecord(_interpolate_impact(x, y, xp, yp, l),
                        emission_index, steps)
