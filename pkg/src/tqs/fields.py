"""Force-field evaluation.

Every variant exerts a force parallel to the x-axis whose magnitude depends
on x only; the y-component is identically zero.  Band and half-plane
boundaries are closed on the inside (<= comparisons), so a particle sitting
exactly on the boundary feels the force.
"""

from __future__ import annotations

import math

from .model import (
    BandConstant,
    FieldSpec,
    GaussianBand,
    HalfPlaneConstant,
    Vec2,
    ZeroField,
)


def eval_field(spec: FieldSpec, pos: Vec2) -> Vec2:
    """Force at pos; a pure, total function of (spec, pos.x)."""
    x = pos.x
    if isinstance(spec, ZeroField):
        return Vec2(0.0, 0.0)
    if isinstance(spec, HalfPlaneConstant):
        return Vec2(spec.F0 if x >= 0.0 else 0.0, 0.0)
    if isinstance(spec, BandConstant):
        return Vec2(spec.F0 if abs(x) <= spec.delta else 0.0, 0.0)
    if isinstance(spec, GaussianBand):
        return Vec2(spec.F0 * math.exp(-spec.sigma * x * x), 0.0)
    raise TypeError(f"unknown field spec {type(spec).__name__}")
