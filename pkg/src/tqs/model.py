"""Domain types and configuration validation.

Everything downstream (fields, emission, dynamics, histogramming, sweeps)
consumes the immutable value types defined here.  A configuration enters the
simulator only after `validate_config` has checked every invariant; after
that the dataclasses are frozen and safe to share across workers.

Geometry convention: the source sits at (-d, 0), the slitted screen S1 at
x = 0 with the slit centered on the origin, and the detector plane S2 at
x = l.  The vertical half-extent R only frames the density image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union


@dataclass(frozen=True)
class Vec2:
    """2D vector; units depend on context (length, velocity or force)."""

    x: float
    y: float

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class ParticleState:
    """Integrator state: position, velocity and the number of time quanta
    elapsed since emission.  Physical time exists only on the lattice
    t = step * tau."""

    pos: Vec2
    vel: Vec2
    step: int = 0


@dataclass(frozen=True)
class Geometry:
    """Apparatus layout: source-to-S1 distance d, S1-to-S2 distance l and
    the vertical half-extent R of the visualization frame."""

    d: float
    l: float
    R: float


# --- force-field variants -------------------------------------------------

@dataclass(frozen=True)
class ZeroField:
    """Free flight everywhere."""


@dataclass(frozen=True)
class HalfPlaneConstant:
    """Force (F0, 0) for x >= 0, zero for x < 0."""

    F0: float


@dataclass(frozen=True)
class BandConstant:
    """Force (F0, 0) inside the band |x| <= delta, zero outside.  The band
    boundary is closed: |x| == delta still feels the force."""

    F0: float
    delta: float


@dataclass(frozen=True)
class GaussianBand:
    """Force (F0 * exp(-sigma * x^2), 0) everywhere."""

    F0: float
    sigma: float


FieldSpec = Union[ZeroField, HalfPlaneConstant, BandConstant, GaussianBand]


# --- emission variants ----------------------------------------------------

@dataclass(frozen=True)
class AngleGrid:
    """Deterministic angle sweep alpha_min, alpha_min + step, ... capped at
    alpha_max.  Angles are radians."""

    alpha_min: float
    alpha_max: float
    alpha_step: float


@dataclass(frozen=True)
class AngleRandom:
    """Uniform pseudo-random angles in [alpha_min, alpha_max); the stream is
    a pure function of (seed, index), so emission is random-access."""

    alpha_min: float
    alpha_max: float
    count: int
    seed: int = 0


@dataclass(frozen=True)
class GaussianLine:
    """Non-point source: y-offset of the emission point is drawn from a
    centered normal with standard deviation sigma_src; the emission angle
    comes from the nested angle spec."""

    sigma_src: float
    angles: Union[AngleGrid, AngleRandom]
    seed: int = 0


EmissionSpec = Union[AngleGrid, AngleRandom, GaussianLine]


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one simulation run.

    max_steps is the per-particle step budget; None means the default
    ceil(4 * (d + l) / (v0 * tau)), resolved lazily so that substituting a
    new tau in a parameter sweep rescales the budget automatically.
    slit_half_width enables absorption at S1 for |y| beyond the slit; None
    (the default) lets every trajectory through, matching the reference
    setup which never tests collision with S1.
    """

    geometry: Geometry
    field: FieldSpec
    emission: EmissionSpec
    tau: float
    v0: float
    mass: float = 1.0
    max_steps: Optional[int] = None
    slit_half_width: Optional[float] = None


def resolved_max_steps(cfg: SimConfig) -> int:
    if cfg.max_steps is not None:
        return cfg.max_steps
    g = cfg.geometry
    return max(1, math.ceil(4.0 * (g.d + g.l) / (cfg.v0 * cfg.tau)))


# --- validation -----------------------------------------------------------

NON_POSITIVE = "non_positive_parameter"
NON_FINITE = "non_finite_parameter"
EMPTY_ANGLE_RANGE = "empty_angle_range"
STEP_OVERSHOOT = "step_overshoot"


@dataclass(frozen=True)
class Violation:
    code: str
    field: str
    message: str


class ConfigurationError(ValueError):
    """Raised by validate_config; carries the complete violation list."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        lines = "; ".join(f"{v.field}: {v.message}" for v in violations)
        super().__init__(f"invalid configuration: {lines}")


def _positive(value: float, name: str, out: list[Violation]) -> None:
    # NaN fails the comparison, so it lands here too, under its own code.
    if isinstance(value, float) and math.isnan(value):
        out.append(Violation(NON_FINITE, name, "must be a finite number"))
    elif not value > 0:
        out.append(Violation(NON_POSITIVE, name, f"must be > 0, got {value}"))
    elif isinstance(value, float) and math.isinf(value):
        out.append(Violation(NON_FINITE, name, "must be finite"))


def _finite(value: float, name: str, out: list[Violation]) -> None:
    if not math.isfinite(value):
        out.append(Violation(NON_FINITE, name, f"must be finite, got {value}"))


def _angle_window(alpha_min: float, alpha_max: float, prefix: str,
                  out: list[Violation]) -> None:
    _finite(alpha_min, f"{prefix}.alpha_min", out)
    _finite(alpha_max, f"{prefix}.alpha_max", out)
    if math.isfinite(alpha_min) and math.isfinite(alpha_max) \
            and not alpha_min < alpha_max:
        out.append(Violation(EMPTY_ANGLE_RANGE, prefix,
                             f"alpha_min ({alpha_min}) must be < alpha_max"
                             f" ({alpha_max})"))


def _check_emission(spec: EmissionSpec, out: list[Violation],
                    prefix: str = "emission") -> None:
    if isinstance(spec, AngleGrid):
        _angle_window(spec.alpha_min, spec.alpha_max, prefix, out)
        _positive(spec.alpha_step, f"{prefix}.alpha_step", out)
    elif isinstance(spec, AngleRandom):
        _angle_window(spec.alpha_min, spec.alpha_max, prefix, out)
        _positive(spec.count, f"{prefix}.count", out)
    elif isinstance(spec, GaussianLine):
        _positive(spec.sigma_src, f"{prefix}.sigma_src", out)
        _check_emission(spec.angles, out, prefix=f"{prefix}.angles")
    else:
        out.append(Violation(NON_FINITE, prefix,
                             f"unknown emission spec {type(spec).__name__}"))


def config_violations(cfg: SimConfig) -> list[Violation]:
    """Return every invariant violation in cfg (empty list means valid)."""
    out: list[Violation] = []
    g = cfg.geometry
    _positive(g.d, "geometry.d", out)
    _positive(g.l, "geometry.l", out)
    _positive(g.R, "geometry.R", out)
    _positive(cfg.tau, "tau", out)
    _positive(cfg.v0, "v0", out)
    _positive(cfg.mass, "mass", out)
    if cfg.max_steps is not None:
        _positive(cfg.max_steps, "max_steps", out)
    if cfg.slit_half_width is not None:
        _positive(cfg.slit_half_width, "slit_half_width", out)

    f = cfg.field
    if isinstance(f, HalfPlaneConstant):
        _finite(f.F0, "field.F0", out)
    elif isinstance(f, BandConstant):
        _finite(f.F0, "field.F0", out)
        _positive(f.delta, "field.delta", out)
    elif isinstance(f, GaussianBand):
        _finite(f.F0, "field.F0", out)
        _positive(f.sigma, "field.sigma", out)
    elif not isinstance(f, ZeroField):
        out.append(Violation(NON_FINITE, "field",
                             f"unknown field spec {type(f).__name__}"))

    _check_emission(cfg.emission, out)

    # A single free step must not cross the whole S1->S2 section, otherwise
    # the trajectory degenerates to one interpolated segment.
    if math.isfinite(cfg.v0) and math.isfinite(cfg.tau) \
            and cfg.v0 > 0 and cfg.tau > 0 and math.isfinite(g.l) and g.l > 0 \
            and cfg.v0 * cfg.tau >= g.l:
        out.append(Violation(STEP_OVERSHOOT, "tau",
                             f"v0 * tau = {cfg.v0 * cfg.tau} must be smaller"
                             f" than l = {g.l}"))
    return out


def validate_config(cfg: SimConfig) -> SimConfig:
    """Return cfg unchanged if every invariant holds; otherwise raise
    ConfigurationError listing all violations, not just the first."""
    violations = config_violations(cfg)
    if violations:
        raise ConfigurationError(violations)
    return cfg
