"""Detector-plane observables: 1D impact histograms, Gaussian smoothing,
2D trajectory-density rasters and the contrast statistic.

Histogram bins are fixed width; an impact y falls into bin
floor((y - origin) / bin_width).  The default origin places a bin center at
y = 0, so a pattern that is mirror-symmetric about the axis produces exactly
mirror-symmetric counts (the axial bin is its own mirror image).

Accumulation and rasterization are associative, commutative integer merges;
partial results from concurrent shards combine by element-wise addition
without any scheduler dependence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dynamics import ImpactRecord, Trajectory
from .model import Geometry


class EmptyHistogram(ValueError):
    pass


@dataclass(frozen=True)
class Histogram:
    """Fixed-width bin counts; counts are integers after accumulation and
    may be real-valued after convolution."""

    origin: float
    bin_width: float
    counts: np.ndarray

    def centers(self) -> np.ndarray:
        n = len(self.counts)
        return self.origin + (np.arange(n) + 0.5) * self.bin_width

    def left_edges(self) -> np.ndarray:
        return self.origin + np.arange(len(self.counts)) * self.bin_width

    def total(self) -> float:
        return float(self.counts.sum())


def default_origin(bin_width: float) -> float:
    """Origin that centers one bin on y = 0."""
    return -bin_width / 2.0


def accumulate(impacts: Sequence[ImpactRecord], bin_width: float,
               origin: float | None = None) -> Histogram:
    """Bin impact ordinates.  Impacts below the requested origin extend the
    bin range downward (origin moves by whole bins); impacts above extend it
    upward.  Nothing is dropped, so sum(counts) == len(impacts), and the
    result does not depend on input order."""
    if not bin_width > 0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")
    base = default_origin(bin_width) if origin is None else origin
    ys = np.array([imp.y_impact for imp in impacts], dtype=float)
    if ys.size == 0:
        return Histogram(base, bin_width, np.zeros(0, dtype=np.int64))
    # Re-anchoring can shift a borderline index once more, hence the loop;
    # it settles after at most a couple of rounds.
    for _ in range(4):
        idx = np.floor((ys - base) / bin_width).astype(np.int64)
        low = int(idx.min())
        if low >= 0:
            break
        base = base + low * bin_width
    counts = np.bincount(idx)
    return Histogram(base, bin_width, counts.astype(np.int64))


def merge(parts: Iterable[Histogram]) -> Histogram:
    """Element-wise sum of histograms sharing bin width and lattice."""
    parts = list(parts)
    if not parts:
        raise EmptyHistogram("nothing to merge")
    width = parts[0].bin_width
    base = min(p.origin for p in parts if len(p.counts)) \
        if any(len(p.counts) for p in parts) else parts[0].origin
    offsets = []
    for p in parts:
        if p.bin_width != width:
            raise ValueError("bin widths differ")
        k = round((p.origin - base) / width)
        if len(p.counts) and abs((p.origin - base) - k * width) > 1e-9 * width:
            raise ValueError("bin lattices are not aligned")
        offsets.append(k)
    length = max((o + len(p.counts) for o, p in zip(offsets, parts)),
                 default=0)
    out = np.zeros(max(length, 0), dtype=parts[0].counts.dtype)
    for o, p in zip(offsets, parts):
        if len(p.counts):
            out[o:o + len(p.counts)] += p.counts
    return Histogram(base, width, out)


def gaussian_kernel(sigma_bins: float) -> np.ndarray:
    radius = int(math.ceil(4.0 * sigma_bins))
    k = np.exp(-0.5 * (np.arange(-radius, radius + 1) / sigma_bins) ** 2)
    return k / k.sum()


def convolve_gaussian(h: Histogram, sigma_bins: float) -> Histogram:
    """Smooth with a normalized Gaussian kernel truncated at +-4 sigma.  The
    output grows by the kernel radius on each side so no mass is lost."""
    if not sigma_bins > 0:
        raise ValueError(f"sigma_bins must be > 0, got {sigma_bins}")
    if len(h.counts) == 0:
        return Histogram(h.origin, h.bin_width, np.zeros(0, dtype=float))
    kernel = gaussian_kernel(sigma_bins)
    radius = (len(kernel) - 1) // 2
    smoothed = np.convolve(h.counts.astype(float), kernel, mode="full")
    return Histogram(h.origin - radius * h.bin_width, h.bin_width, smoothed)


@dataclass(frozen=True)
class DensityGrid:
    """Row-major cell counts of trajectory points over
    [-d, l] x [-R, R]; row 0 is the top of the frame (largest y)."""

    width: int
    height: int
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    cells: np.ndarray
    dropped: int


def density_grid(trajectories: Sequence[Trajectory], geometry: Geometry,
                 width: int, height: int) -> DensityGrid:
    """Rasterize trajectory points; points outside the frame are dropped and
    counted.  Every in-frame point increments exactly one cell."""
    if width < 2 or height < 2:
        raise ValueError("grid must be at least 2x2")
    x_lo, x_hi = -geometry.d, geometry.l
    y_lo, y_hi = -geometry.R, geometry.R
    cells = np.zeros((height, width), dtype=np.int64)
    arrays = [traj.points if isinstance(traj, Trajectory)
              else np.asarray(traj) for traj in trajectories]
    arrays = [a for a in arrays if len(a)]
    if not arrays:
        return DensityGrid(width, height, (x_lo, x_hi), (y_lo, y_hi), cells, 0)
    pts = np.concatenate(arrays)
    xs = pts[:, 0]
    ys = pts[:, 1]
    inside = (xs >= x_lo) & (xs <= x_hi) & (ys >= y_lo) & (ys <= y_hi)
    dropped = int((~inside).sum())
    xs = xs[inside]
    ys = ys[inside]
    cols = np.minimum((np.floor((xs - x_lo) / (x_hi - x_lo) * width))
                      .astype(np.int64), width - 1)
    rows = np.minimum((np.floor((y_hi - ys) / (y_hi - y_lo) * height))
                      .astype(np.int64), height - 1)
    np.add.at(cells, (rows, cols), 1)
    return DensityGrid(width, height, (x_lo, x_hi), (y_lo, y_hi), cells,
                       dropped)


@dataclass(frozen=True)
class ContrastStats:
    """Pattern-strength summary: count of significant interior maxima and
    the ratio of the highest peak to the lowest valley between peaks
    (math.inf when a valley bin is zero or no valley exists)."""

    n_maxima: int
    peak_to_valley: float


_FLOOR_FRACTION = 0.05


def significant_maxima(values: np.ndarray, floor: float) -> list[int]:
    """Indices of interior local maxima that rise at least `floor` above
    the valleys separating them (hysteresis scan).

    The scan commits a maximum once the signal has dropped by `floor` from
    the running crest, and re-arms after it has risen by `floor` from the
    running trough; this screens out sub-floor quantization ripple.  A
    plateau is reported once, at its left edge (ties never move the crest
    index).  Crests sitting on the first or last bin are not interior and
    are discarded.
    """
    n = len(values)
    peaks: list[int] = []
    crest = trough = float(values[0])
    crest_i = 0
    descending = False
    for i in range(1, n):
        v = float(values[i])
        if descending:
            if v < trough:
                trough = v
            if v - trough >= floor and trough < crest:
                descending = False
                crest = v
                crest_i = i
        else:
            if v > crest:
                crest = v
                crest_i = i
            if crest - v >= floor:
                if 0 < crest_i < n - 1:
                    peaks.append(crest_i)
                descending = True
                trough = v
    return peaks


def contrast(h: Histogram, smoothing_bins: float = 1.0) -> ContrastStats:
    """Pattern contrast after light Gaussian smoothing (default one bin).

    n_maxima counts interior local maxima that clear a floor of 5% of the
    global maximum, both in height and in rise over the adjacent valleys.
    peak_to_valley divides the largest maximum by the smallest interior
    minimum between counted maxima; a zero-count valley yields math.inf, as
    does a histogram with fewer than two counted maxima (no valley exists).
    """
    if len(h.counts) == 0 or float(h.counts.sum()) == 0.0:
        raise EmptyHistogram("contrast needs a histogram with mass")
    if smoothing_bins > 0:
        values = convolve_gaussian(h, smoothing_bins).counts
    else:
        values = h.counts.astype(float)
    floor = _FLOOR_FRACTION * float(values.max())
    peaks = [p for p in significant_maxima(values, floor)
             if values[p] >= floor]
    if len(peaks) < 2:
        return ContrastStats(len(peaks), math.inf)
    valley = min(float(values[p + 1:q].min())
                 for p, q in zip(peaks, peaks[1:]))
    peak = max(float(values[p]) for p in peaks)
    ratio = math.inf if valley == 0.0 else peak / valley
    return ContrastStats(len(peaks), ratio)
