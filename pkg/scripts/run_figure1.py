#!/usr/bin/env python3
"""Run the three headline hit-probability sweeps and write their CSVs.

Panels: Boolean model with Zipf exponents 0.9 and 0.56, and the SINR (SIR,
W=0) model with exponent 0.9; thresholds from -12 dB to 12 dB, 5 cache
blocks, 40 contents, unit station density. Plot hit_prob against
mean_coverage per policy to recreate the curves.
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from geocache.cli import ExperimentConfig, run_sweep, write_sweep_csv  # noqa: E402

PANELS = [
    ("fig1a_boolean_gamma09", "boolean", 0.9),
    ("fig1b_boolean_gamma056", "boolean", 0.56),
    ("fig1c_sinr_gamma09", "sinr", 0.9),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results", help="output directory")
    parser.add_argument("--step", type=float, default=1.0, help="dB grid step")
    parser.add_argument("--trials", type=int, default=0,
                        help="Monte Carlo verification trials per cell (0 = off)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    grid = []
    v = -12.0
    while v <= 12.0 + 1e-9:
        grid.append(round(v, 9))
        v += args.step

    status = 0
    for name, model, gamma in PANELS:
        config = ExperimentConfig(
            model=model,
            gamma=gamma,
            tau_db_grid=tuple(grid),
            trials=args.trials,
            seed=args.seed,
        )
        t0 = time.time()
        rows, ok = run_sweep(config)
        path = out_dir / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            write_sweep_csv(rows, config, fh)
        print(f"{path}: {len(rows)} rows in {time.time() - t0:.1f}s (consistent={ok})")
        if not ok:
            status = 2
    return status


if __name__ == "__main__":
    sys.exit(main())
