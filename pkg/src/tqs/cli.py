"""Command-line interface and all file I/O.

Subcommands:

    tqs simulate --config run.cfg --out results/
    tqs analyze  --config run.cfg [--i-max N] [--with-minima]
    tqs sweep    --config run.cfg --axis tau --values 0.025,0.0125 --out dir/

Configs are flat ``key = value`` text with ``#`` comments; keys mirror the
SimConfig fields (see the README for the full key table).  Angles are given
in degrees in hand-written configs; machine-written manifests use the
``*_rad`` twins so a round trip reproduces the exact same configuration bit
for bit.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 runtime
error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .histogram import DensityGrid, Histogram, accumulate, contrast, density_grid
from .model import (
    AngleGrid,
    AngleRandom,
    BandConstant,
    ConfigurationError,
    EmissionSpec,
    FieldSpec,
    GaussianBand,
    GaussianLine,
    Geometry,
    HalfPlaneConstant,
    SimConfig,
    ZeroField,
    resolved_max_steps,
    validate_config,
)
from .analytics import (
    NeverReachesDetector,
    UnsupportedField,
    compute_n0,
    deviation_origins,
    is_black_region,
    minima_by_index,
)
from .sweep import SweepAxis, SweepError, resolve_workers, run_batch, run_sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

DEFAULT_BIN_WIDTH = 0.1
DENSITY_WIDTH = 600
DENSITY_HEIGHT = 400
HISTOGRAM_IMAGE_HEIGHT = 120


class ConfigError(Exception):
    pass


class _UsageExit(Exception):
    def __init__(self, message: str):
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the CLI contract wants 1.
    def error(self, message):
        raise _UsageExit(message)


# --- config file parsing ----------------------------------------------------

def parse_kv_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value',"
                              f" got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


_KNOWN_KEYS = {
    "geometry.d", "geometry.l", "geometry.R",
    "field.kind", "field.F0", "field.q", "field.delta", "field.sigma",
    "emission.kind", "emission.angle_mode",
    "emission.alpha_min_deg", "emission.alpha_max_deg",
    "emission.alpha_step_deg",
    "emission.alpha_min_rad", "emission.alpha_max_rad",
    "emission.alpha_step_rad",
    "emission.count", "emission.seed", "emission.angle_seed",
    "emission.sigma_src",
    "tau", "v0", "mass", "max_steps", "slit_half_width",
    "bin_width", "threads",
}


class _KV:
    """Typed accessors over the raw key/value map, tracking consumption."""

    def __init__(self, data: dict[str, str], source: str):
        self.data = data
        self.source = source

    def _get(self, key: str) -> Optional[str]:
        return self.data.get(key)

    def required(self, key: str) -> str:
        value = self._get(key)
        if value is None:
            raise ConfigError(f"{self.source}: missing required key {key!r}")
        return value

    def number(self, key: str, default: Optional[float] = None) -> Optional[float]:
        value = self._get(key)
        if value is None:
            return default
        try:
            return float(value)
        except ValueError:
            raise ConfigError(
                f"{self.source}: key {key!r} is not a number: {value!r}")

    def integer(self, key: str, default: Optional[int] = None) -> Optional[int]:
        value = self._get(key)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError:
            raise ConfigError(
                f"{self.source}: key {key!r} is not an integer: {value!r}")

    def angle(self, key_base: str, default: Optional[float] = None) -> Optional[float]:
        deg = self._get(key_base + "_deg")
        rad = self._get(key_base + "_rad")
        if deg is not None and rad is not None:
            raise ConfigError(f"{self.source}: give {key_base}_deg or"
                              f" {key_base}_rad, not both")
        if rad is not None:
            return self.number(key_base + "_rad")
        if deg is not None:
            return math.radians(self.number(key_base + "_deg"))
        return default

    def require_angle(self, key_base: str) -> float:
        value = self.angle(key_base)
        if value is None:
            raise ConfigError(f"{self.source}: missing required key"
                              f" {key_base}_deg (or {key_base}_rad)")
        return value


def _parse_field(kv: _KV) -> FieldSpec:
    kind = kv.required("field.kind")
    if kind == "zero":
        return ZeroField()
    f0 = kv.number("field.F0")
    if f0 is None:
        q = kv.number("field.q", -1.0)
        f0 = 2.0 * math.pi * q
    if kind == "half_plane":
        return HalfPlaneConstant(f0)
    if kind == "band":
        delta = kv.number("field.delta")
        if delta is None:
            raise ConfigError(f"{kv.source}: band field needs field.delta")
        return BandConstant(f0, delta)
    if kind == "gaussian":
        sigma = kv.number("field.sigma")
        if sigma is None:
            raise ConfigError(f"{kv.source}: gaussian field needs field.sigma")
        return GaussianBand(f0, sigma)
    raise ConfigError(f"{kv.source}: unknown field.kind {kind!r}"
                      " (zero, half_plane, band, gaussian)")


def _parse_angles(kv: _KV, mode: str, seed_key: str) -> AngleGrid | AngleRandom:
    if mode == "grid":
        return AngleGrid(kv.require_angle("emission.alpha_min"),
                         kv.require_angle("emission.alpha_max"),
                         kv.require_angle("emission.alpha_step"))
    if mode == "random":
        count = kv.integer("emission.count")
        if count is None:
            raise ConfigError(f"{kv.source}: random emission needs"
                              " emission.count")
        return AngleRandom(kv.require_angle("emission.alpha_min"),
                           kv.require_angle("emission.alpha_max"),
                           count, kv.integer(seed_key, 0))
    raise ConfigError(f"{kv.source}: unknown angle mode {mode!r}"
                      " (grid, random)")


def _parse_emission(kv: _KV) -> EmissionSpec:
    kind = kv.required("emission.kind")
    if kind == "angle_grid":
        return _parse_angles(kv, "grid", "emission.seed")
    if kind == "angle_random":
        return _parse_angles(kv, "random", "emission.seed")
    if kind == "gaussian_line":
        sigma_src = kv.number("emission.sigma_src")
        if sigma_src is None:
            raise ConfigError(f"{kv.source}: gaussian_line emission needs"
                              " emission.sigma_src")
        mode = kv._get("emission.angle_mode") or "grid"
        angles = _parse_angles(kv, mode, "emission.angle_seed")
        return GaussianLine(sigma_src, angles, kv.integer("emission.seed", 0))
    raise ConfigError(f"{kv.source}: unknown emission.kind {kind!r}"
                      " (angle_grid, angle_random, gaussian_line)")


def build_config(data: dict[str, str], source: str = "<config>"
                 ) -> tuple[SimConfig, dict]:
    """Build a SimConfig plus run extras (bin_width, threads) from parsed
    keys.  Keys under ``run.`` are manifest metadata and are ignored."""
    unknown = sorted(k for k in data
                     if k not in _KNOWN_KEYS and not k.startswith("run."))
    if unknown:
        raise ConfigError(f"{source}: unknown key(s): {', '.join(unknown)}")
    kv = _KV(data, source)
    geometry = Geometry(kv.number("geometry.d"), kv.number("geometry.l"),
                        kv.number("geometry.R"))
    for name, value in (("geometry.d", geometry.d),
                        ("geometry.l", geometry.l),
                        ("geometry.R", geometry.R),
                        ("tau", kv.number("tau")),
                        ("v0", kv.number("v0"))):
        if value is None:
            raise ConfigError(f"{source}: missing required key {name!r}")
    cfg = SimConfig(
        geometry=geometry,
        field=_parse_field(kv),
        emission=_parse_emission(kv),
        tau=kv.number("tau"),
        v0=kv.number("v0"),
        mass=kv.number("mass", 1.0),
        max_steps=kv.integer("max_steps"),
        slit_half_width=kv.number("slit_half_width"),
    )
    extras = {
        "bin_width": kv.number("bin_width", DEFAULT_BIN_WIDTH),
        "threads": kv.integer("threads"),
    }
    return cfg, extras


def load_config(path: Path) -> tuple[SimConfig, dict]:
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    data = parse_kv_text(path.read_text(), str(path))
    return build_config(data, str(path))


# --- config / manifest emission ----------------------------------------------

def _fmt(value: float) -> str:
    return repr(float(value))


def config_lines(cfg: SimConfig, bin_width: float) -> list[str]:
    """Serialize a SimConfig to key = value lines that re-parse to an
    identical SimConfig (angles written in radians to preserve bits)."""
    lines = [
        f"geometry.d = {_fmt(cfg.geometry.d)}",
        f"geometry.l = {_fmt(cfg.geometry.l)}",
        f"geometry.R = {_fmt(cfg.geometry.R)}",
    ]
    f = cfg.field
    if isinstance(f, ZeroField):
        lines.append("field.kind = zero")
    elif isinstance(f, HalfPlaneConstant):
        lines += ["field.kind = half_plane", f"field.F0 = {_fmt(f.F0)}"]
    elif isinstance(f, BandConstant):
        lines += ["field.kind = band", f"field.F0 = {_fmt(f.F0)}",
                  f"field.delta = {_fmt(f.delta)}"]
    else:
        lines += ["field.kind = gaussian", f"field.F0 = {_fmt(f.F0)}",
                  f"field.sigma = {_fmt(f.sigma)}"]

    def angle_lines(spec, seed_key: str) -> list[str]:
        out = [f"emission.alpha_min_rad = {_fmt(spec.alpha_min)}",
               f"emission.alpha_max_rad = {_fmt(spec.alpha_max)}"]
        if isinstance(spec, AngleGrid):
            out.append(f"emission.alpha_step_rad = {_fmt(spec.alpha_step)}")
        else:
            out += [f"emission.count = {spec.count}",
                    f"{seed_key} = {spec.seed}"]
        return out

    e = cfg.emission
    if isinstance(e, AngleGrid):
        lines += ["emission.kind = angle_grid"] + angle_lines(e, "")
    elif isinstance(e, AngleRandom):
        lines += ["emission.kind = angle_random"] \
            + angle_lines(e, "emission.seed")
    else:
        mode = "grid" if isinstance(e.angles, AngleGrid) else "random"
        lines += ["emission.kind = gaussian_line",
                  f"emission.sigma_src = {_fmt(e.sigma_src)}",
                  f"emission.angle_mode = {mode}",
                  f"emission.seed = {e.seed}"] \
            + angle_lines(e.angles, "emission.angle_seed")
    lines += [f"tau = {_fmt(cfg.tau)}", f"v0 = {_fmt(cfg.v0)}",
              f"mass = {_fmt(cfg.mass)}"]
    if cfg.max_steps is not None:
        lines.append(f"max_steps = {cfg.max_steps}")
    if cfg.slit_half_width is not None:
        lines.append(f"slit_half_width = {_fmt(cfg.slit_half_width)}")
    lines.append(f"bin_width = {_fmt(bin_width)}")
    return lines


def write_manifest(path: Path, cfg: SimConfig, bin_width: float,
                   run_info: dict) -> None:
    lines = ["# resolved run configuration (re-parseable as a config file)"]
    lines += config_lines(cfg, bin_width)
    lines.append("")
    for key, value in run_info.items():
        lines.append(f"run.{key} = {value}")
    path.write_text("\n".join(lines) + "\n")


# --- CSV / PGM writers --------------------------------------------------------

def write_impacts_csv(path: Path, impacts) -> None:
    rows = ["emission_index,y_impact,steps_taken"]
    rows += [f"{imp.emission_index},{_fmt(imp.y_impact)},{imp.steps_taken}"
             for imp in impacts]
    path.write_text("\n".join(rows) + "\n")


def write_histogram_csv(path: Path, hist: Histogram) -> None:
    rows = ["bin_left,bin_center,count"]
    lefts = hist.left_edges()
    centers = hist.centers()
    for left, center, count in zip(lefts, centers, hist.counts):
        value = int(count) if float(count).is_integer() else float(count)
        rows.append(f"{_fmt(left)},{_fmt(center)},{value}")
    path.write_text("\n".join(rows) + "\n")


def write_summary_csv(path: Path, result) -> None:
    rows = ["value,n_maxima,peak_to_valley,failures"]
    for entry in result.entries:
        if entry.error is not None:
            rows.append(f"{_fmt(entry.value)},,,{entry.failures}")
        else:
            p2v = entry.contrast.peak_to_valley
            p2v_txt = "inf" if math.isinf(p2v) else _fmt(p2v)
            rows.append(f"{_fmt(entry.value)},{entry.contrast.n_maxima},"
                        f"{p2v_txt},{entry.failures}")
    path.write_text("\n".join(rows) + "\n")


def write_pgm(path: Path, gray: np.ndarray) -> None:
    """Textual P2 image, maxval 255, row 0 on top."""
    height, width = gray.shape
    lines = ["P2", f"{width} {height}", "255"]
    lines += [" ".join(str(int(v)) for v in row) for row in gray]
    path.write_text("\n".join(lines) + "\n")


def histogram_image(hist: Histogram, height: int = HISTOGRAM_IMAGE_HEIGHT
                    ) -> np.ndarray:
    counts = hist.counts.astype(np.int64)
    top = int(counts.max()) if len(counts) else 0
    if top == 0:
        return np.zeros((height, max(len(counts), 1)), dtype=np.int64)
    column = (counts * 255) // top
    return np.tile(column, (height, 1))


def density_image(grid: DensityGrid) -> np.ndarray:
    # log scaling keeps the sparse far field visible next to the dense
    # source region.
    top = int(grid.cells.max())
    if top == 0:
        return np.zeros_like(grid.cells)
    scale = 255.0 / math.log1p(top)
    return np.floor(np.log1p(grid.cells.astype(float)) * scale).astype(np.int64)


# --- subcommands ---------------------------------------------------------------

def _resolved_threads(args, extras) -> int:
    requested = args.threads if args.threads is not None else extras.get("threads")
    return resolve_workers(requested)


def _apply_seed_override(cfg: SimConfig, seed: Optional[int]) -> SimConfig:
    if seed is None:
        return cfg
    from dataclasses import replace
    e = cfg.emission
    if isinstance(e, AngleRandom):
        return replace(cfg, emission=replace(e, seed=seed))
    if isinstance(e, GaussianLine):
        angles = e.angles
        if isinstance(angles, AngleRandom):
            angles = replace(angles, seed=seed)
        return replace(cfg, emission=replace(e, seed=seed, angles=angles))
    return cfg


def cmd_simulate(args) -> int:
    cfg, extras = load_config(Path(args.config))
    cfg = _apply_seed_override(cfg, args.seed)
    validate_config(cfg)
    bin_width = args.bin_width if args.bin_width is not None \
        else extras["bin_width"]
    if not bin_width > 0:
        raise ConfigError(f"bin width must be > 0, got {bin_width}")
    workers = _resolved_threads(args, extras)
    out_dir = Path(args.out)

    t0 = time.perf_counter()
    batch = run_batch(cfg, workers=workers, collect_trajectories=True)
    wall = time.perf_counter() - t0
    hist = accumulate(batch.impacts, bin_width)
    grid = density_grid(batch.trajectories, cfg.geometry,
                        DENSITY_WIDTH, DENSITY_HEIGHT)

    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {name: out_dir / name for name in
             ("impacts.csv", "histogram.csv", "histogram.pgm",
              "density.pgm", "manifest")}
    write_impacts_csv(paths["impacts.csv"], batch.impacts)
    write_histogram_csv(paths["histogram.csv"], hist)
    write_pgm(paths["histogram.pgm"], histogram_image(hist))
    write_pgm(paths["density.pgm"], density_image(grid))
    run_info = {
        "version": __version__,
        "command": "simulate",
        "threads": workers,
        "wall_time_s": f"{wall:.3f}",
        "completed": len(batch.impacts),
        "failures": batch.failure_count,
        "max_steps_resolved": resolved_max_steps(cfg),
        "points_outside_frame": grid.dropped,
    }
    for name in sorted(paths):
        if name != "manifest":
            run_info[f"output.{name}"] = paths[name].name
    write_manifest(paths["manifest"], cfg, bin_width, run_info)
    print(f"simulate: {len(batch.impacts)} impacts,"
          f" {batch.failure_count} failures, {wall:.2f} s"
          f" -> {out_dir}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg, extras = load_config(Path(args.config))
    validate_config(cfg)
    g = cfg.geometry
    n0 = compute_n0(g.d, cfg.v0, cfg.tau)
    black = is_black_region(g.d, cfg.v0, cfg.tau)
    print(f"# n0 = {n0}")
    print(f"# d_over_v0tau = {_fmt(g.d / (cfg.v0 * cfg.tau))}")
    print(f"# black_region = {str(black).lower()}")
    minima: dict[int, float] = {}
    if args.with_minima:
        try:
            minima = minima_by_index(cfg, args.i_max)
        except (UnsupportedField, NeverReachesDetector) as exc:
            print(f"# minima_unavailable = {exc}")
    header = "i,a_i,phi_i_rad,phi_i_deg"
    if minima:
        header += ",minimum_y"
    print(header)
    if args.i_max > 0:
        origins = deviation_origins(g.d, cfg.v0, cfg.tau, args.i_max)
        for i in sorted(origins.a):
            row = (f"{i},{_fmt(origins.a[i])},{_fmt(origins.phi[i])},"
                   f"{_fmt(math.degrees(origins.phi[i]))}")
            if minima:
                row += f",{_fmt(minima[i])}"
            print(row)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg, extras = load_config(Path(args.config))
    cfg = _apply_seed_override(cfg, args.seed)
    validate_config(cfg)
    try:
        values = tuple(float(v) for v in args.values.split(","))
    except ValueError:
        raise _UsageExit(f"--values must be a comma-separated list of"
                         f" numbers, got {args.values!r}")
    try:
        axis = SweepAxis(args.axis, values)
    except SweepError as exc:
        raise _UsageExit(str(exc))
    bin_width = args.bin_width if args.bin_width is not None \
        else extras["bin_width"]
    workers = _resolved_threads(args, extras)
    out_dir = Path(args.out)

    t0 = time.perf_counter()
    result = run_sweep(cfg, axis, bin_width=bin_width, workers=workers)
    wall = time.perf_counter() - t0

    out_dir.mkdir(parents=True, exist_ok=True)
    for k, entry in enumerate(result.entries):
        if entry.histogram is not None:
            write_histogram_csv(out_dir / f"histogram_{k:03d}.csv",
                                entry.histogram)
    write_summary_csv(out_dir / "summary.csv", result)
    run_info = {
        "version": __version__,
        "command": "sweep",
        "axis": axis.parameter,
        "axis_values": ",".join(_fmt(v) for v in values),
        "threads": workers,
        "wall_time_s": f"{wall:.3f}",
    }
    write_manifest(out_dir / "manifest", cfg, bin_width, run_info)
    errors = [e for e in result.entries if e.error]
    for entry in errors:
        print(f"sweep value {entry.value}: {entry.error}", file=sys.stderr)
    print(f"sweep: {len(result.entries)} values, {len(errors)} failed,"
          f" {wall:.2f} s -> {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tqs",
                     description="Discrete-time single-slit scattering"
                                 " simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out=True):
        p.add_argument("--config", required=True, help="path to a config file")
        p.add_argument("--threads", type=int, default=None,
                       help="worker count (TQS_THREADS overrides)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the emission seed")
        p.add_argument("--bin-width", type=float, default=None,
                       help="histogram bin width (overrides config)")
        if with_out:
            p.add_argument("--out", required=True, help="output directory")

    p_sim = sub.add_parser("simulate", help="run a batch and write outputs")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_ana = sub.add_parser("analyze", help="closed-form pattern analytics")
    p_ana.add_argument("--config", required=True)
    p_ana.add_argument("--i-max", type=int, default=3,
                       help="largest |i| for the deviation origins")
    p_ana.add_argument("--with-minima", action="store_true",
                       help="also propagate the fork trajectories")
    p_ana.set_defaults(func=cmd_analyze)

    p_swp = sub.add_parser("sweep", help="run a parameter sweep")
    common(p_swp)
    p_swp.add_argument("--axis", required=True,
                       help="parameter to sweep (tau, d, F0, sigma, v0)")
    p_swp.add_argument("--values", required=True,
                       help="comma-separated axis values")
    p_swp.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageExit as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ConfigurationError, SweepError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
