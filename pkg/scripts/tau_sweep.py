#!/usr/bin/env python3
"""Halve the time quant repeatedly and watch the interference contrast
decay: the pattern is an artifact of the finite quant and washes out as the
dynamics approach their continuous limit.
"""

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from tqs import SweepAxis, run_sweep  # noqa: E402
from tqs.cli import load_config  # noqa: E402

HALVINGS = 7


def run() -> int:
    cfg, _ = load_config(REPO / "configs" / "appendix.cfg")
    taus = tuple(cfg.tau / 2 ** k for k in range(HALVINGS))
    result = run_sweep(cfg, SweepAxis("tau", taus))
    print("tau        n_maxima  peak/valley  failures  wall[s]")
    for e in result.entries:
        if e.error:
            print(f"{e.value:<10.6f} {e.error}")
        else:
            print(f"{e.value:<10.6f} {e.contrast.n_maxima:>8d}"
                  f"  {e.contrast.peak_to_valley:>11.3f}"
                  f"  {e.failures:>8d}  {e.wall_time:>7.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
