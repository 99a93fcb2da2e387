"""Deterministic parallel batches and parameter sweeps.

Work is an embarrassingly parallel map over emission indices.  Each worker
handles a contiguous index range and the partial results are concatenated in
range order, so every aggregate is bit-identical no matter how many workers
run it.  Workers share nothing but the (immutable) configuration.

The worker count resolves as: TQS_THREADS environment variable if set, else
the explicit request, else the physical core count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import psutil

from . import analytics
from .dynamics import (
    ImpactRecord,
    SimulationError,
    impact_of,
    propagate_to_detector,
    record_trajectory,
)
from .emission import emit, make_stream
from .histogram import ContrastStats, Histogram, accumulate, contrast
from .model import (
    BandConstant,
    GaussianBand,
    HalfPlaneConstant,
    SimConfig,
    validate_config,
)

SWEEP_PARAMETERS = ("tau", "d", "F0", "sigma", "v0")

THREADS_ENV_VAR = "TQS_THREADS"


class SweepError(ValueError):
    pass


def resolve_workers(requested: Optional[int] = None) -> int:
    env = os.environ.get(THREADS_ENV_VAR)
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            value = 0
        if value <= 0:
            raise SweepError(
                f"{THREADS_ENV_VAR} must be a positive integer, got {env!r}")
        return value
    if requested is not None:
        if requested <= 0:
            raise SweepError(f"worker count must be positive, got {requested}")
        return requested
    physical = psutil.cpu_count(logical=False)
    return physical or os.cpu_count() or 1


@dataclass(frozen=True)
class BatchResult:
    """Impacts ordered by emission index; particles that never reached the
    detector appear in `failures` as (emission index, reason) instead."""

    impacts: list[ImpactRecord]
    failures: list[tuple[int, str]]
    trajectories: Optional[list[np.ndarray]]

    @property
    def failure_count(self) -> int:
        return len(self.failures)


def _run_range(cfg: SimConfig, start: int, stop: int,
               collect: bool) -> tuple[list[ImpactRecord],
                                       list[tuple[int, str]],
                                       Optional[list[np.ndarray]]]:
    stream = make_stream(cfg.emission, cfg.v0, cfg.geometry)
    impacts: list[ImpactRecord] = []
    failures: list[tuple[int, str]] = []
    trajectories: Optional[list[np.ndarray]] = [] if collect else None
    for index in range(start, stop):
        initial = emit(stream, index)
        try:
            if trajectories is None:
                impacts.append(propagate_to_detector(initial, cfg, index))
            else:
                # The recorded pass shares the propagation kernel, so the
                # derived impact is bit-identical to the direct one.
                traj = record_trajectory(initial, cfg)
                impacts.append(impact_of(traj, cfg.geometry.l, index,
                                         initial.step))
                trajectories.append(traj.points)
        except SimulationError as exc:
            failures.append((index, type(exc).__name__))
    return impacts, failures, trajectories


def run_batch(cfg: SimConfig, workers: Optional[int] = None,
              collect_trajectories: bool = False) -> BatchResult:
    """Propagate every emitted particle to the detector."""
    validate_config(cfg)
    total = make_stream(cfg.emission, cfg.v0, cfg.geometry).total
    n_workers = min(resolve_workers(workers), max(total, 1))
    if n_workers <= 1:
        impacts, failures, trajs = _run_range(cfg, 0, total,
                                              collect_trajectories)
        return BatchResult(impacts, failures, trajs)
    bounds = [total * k // n_workers for k in range(n_workers + 1)]
    chunks = [(cfg, lo, hi, collect_trajectories)
              for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    impacts = []
    failures = []
    trajs = [] if collect_trajectories else None
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        for part_impacts, part_failures, part_trajs in pool.map(
                _run_range_star, chunks):
            impacts.extend(part_impacts)
            failures.extend(part_failures)
            if trajs is not None:
                trajs.extend(part_trajs)
    return BatchResult(impacts, failures, trajs)


def _run_range_star(args):
    return _run_range(*args)


# --- parameter sweeps -------------------------------------------------------

@dataclass(frozen=True)
class SweepAxis:
    """One swept parameter and its (strictly monotone) values."""

    parameter: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise SweepError(
                f"unknown sweep parameter {self.parameter!r};"
                f" valid: {', '.join(SWEEP_PARAMETERS)}")
        if not self.values:
            raise SweepError("sweep needs at least one value")
        diffs = [b - a for a, b in zip(self.values, self.values[1:])]
        if diffs and not (all(d > 0 for d in diffs)
                          or all(d < 0 for d in diffs)):
            raise SweepError("sweep values must be strictly monotone")


def substitute(cfg: SimConfig, parameter: str, value: float) -> SimConfig:
    """Return cfg with one swept parameter replaced (and validated)."""
    if parameter == "tau":
        out = replace(cfg, tau=value)
    elif parameter == "v0":
        out = replace(cfg, v0=value)
    elif parameter == "d":
        out = replace(cfg, geometry=replace(cfg.geometry, d=value))
    elif parameter == "F0":
        if not isinstance(cfg.field, (HalfPlaneConstant, BandConstant,
                                      GaussianBand)):
            raise SweepError("F0 sweep needs a field with a force amplitude")
        out = replace(cfg, field=replace(cfg.field, F0=value))
    elif parameter == "sigma":
        if not isinstance(cfg.field, GaussianBand):
            raise SweepError("sigma sweep needs a Gaussian band field")
        out = replace(cfg, field=replace(cfg.field, sigma=value))
    else:
        raise SweepError(f"unknown sweep parameter {parameter!r}")
    return validate_config(out)


@dataclass(frozen=True)
class SweepEntry:
    value: float
    histogram: Optional[Histogram]
    contrast: Optional[ContrastStats]
    failures: int
    wall_time: float
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    entries: list[SweepEntry]


def run_sweep(base: SimConfig, axis: SweepAxis, bin_width: float = 0.1,
              smoothing_bins: float = 1.0,
              workers: Optional[int] = None) -> SweepResult:
    """Run one batch per axis value; a failing value is recorded and the
    sweep continues."""
    entries = []
    for value in axis.values:
        t0 = time.perf_counter()
        try:
            cfg = substitute(base, axis.parameter, value)
            batch = run_batch(cfg, workers=workers)
            hist = accumulate(batch.impacts, bin_width)
            stats = contrast(hist, smoothing_bins)
            entries.append(SweepEntry(value, hist, stats,
                                      batch.failure_count,
                                      time.perf_counter() - t0))
        except (SweepError, SimulationError, ValueError) as exc:
            entries.append(SweepEntry(value, None, None, 0,
                                      time.perf_counter() - t0,
                                      error=f"{type(exc).__name__}: {exc}"))
    return SweepResult(axis.parameter, entries)


# --- convergence against the continuous-time oracle -------------------------

@dataclass(frozen=True)
class ConvergenceStudy:
    """|y_discrete - y_classical| per (alpha, tau) plus the fitted log-log
    convergence order per alpha (nan when every error vanishes)."""

    alphas: tuple[float, ...]
    tau_values: tuple[float, ...]
    errors: np.ndarray
    slopes: tuple[float, ...]


def convergence_study(base: SimConfig, alphas: Sequence[float],
                      tau_values: Sequence[float]) -> ConvergenceStudy:
    from .model import ParticleState, Vec2

    errors = np.zeros((len(alphas), len(tau_values)))
    slopes = []
    for i, alpha in enumerate(alphas):
        initial = ParticleState(
            Vec2(-base.geometry.d, 0.0),
            Vec2(base.v0 * math.cos(alpha), base.v0 * math.sin(alpha)), 0)
        reference = analytics.classical_reference(
            initial, base.field, base.geometry, base.mass)
        for j, tau in enumerate(tau_values):
            cfg = replace(base, tau=tau)
            impact = propagate_to_detector(initial, cfg)
            errors[i, j] = abs(impact.y_impact - reference)
        mask = errors[i] > 0
        if mask.sum() >= 2:
            slope, _ = np.polyfit(np.log(np.asarray(tau_values)[mask]),
                                  np.log(errors[i][mask]), 1)
            slopes.append(float(slope))
        else:
            slopes.append(float("nan"))
    return ConvergenceStudy(tuple(alphas), tuple(tau_values), errors,
                            tuple(slopes))
