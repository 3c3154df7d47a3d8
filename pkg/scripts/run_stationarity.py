"""Exact error vs alpha for random unit w under known statistics.

For each of several random w, compares alpha_MMSE with the grid minimizer
(w^T mu > 0) or maximizer (w^T mu < 0) of the exact error.

    python scripts/run_stationarity.py --p 200 --trials 20 --out results/stationarity.csv
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from wvtune.alpha_core import alpha_grid, alpha_mmse
from wvtune.core_stats import benchmark_common_model
from wvtune.experiments import known_means_curve, random_unit_vector


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=200)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--step", type=float, default=0.005)
    ap.add_argument("--out", default="results/stationarity.csv")
    args = ap.parse_args()

    model = benchmark_common_model(args.p)
    rng = np.random.default_rng(args.seed)
    rows = []
    for t in range(args.trials):
        w = random_unit_vector(args.p, rng)
        for orient in (1, -1):
            v = w if orient * (w @ model.mu) > 0 else -w
            a = alpha_mmse(v, model)
            grid = alpha_grid(np.floor(min(a, 0) - 1), np.ceil(max(a, 1) + 1), args.step)
            curve = known_means_curve(v, model, grid)
            k = np.argmin(curve) if orient > 0 else np.argmax(curve)
            rows.append((t, "min" if orient > 0 else "max", f"{a:.6f}", f"{grid[k]:.3f}", f"{curve[k]:.6f}"))

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["trial", "extremum", "alpha_mmse", "grid_alpha", "exact_error"])
        wr.writerows(rows)
    hits = sum(abs(float(r[2]) - float(r[3])) <= args.step + 1e-12 for r in rows)
    print(f"{hits}/{len(rows)} extrema within one grid step of alpha_MMSE -> {args.out}")


if __name__ == "__main__":
    main()
