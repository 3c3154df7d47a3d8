"""Deterministic-equivalent and G-estimator gaps against the exact error.

    python scripts/run_validation.py --outdir results
"""
import argparse
import sys
from pathlib import Path

from wvtune.cli import main as cli

HERE = Path(__file__).resolve().parent


def summary(path, cols):
    for line in open(path):
        if ",all," in line:
            parts = line.strip().split(",")
            print(f"  p={parts[0]:>4s} n={parts[1]:>4s} " + " ".join(f"{c}={parts[i]}" for c, i in cols))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()
    Path(args.outdir).mkdir(parents=True, exist_ok=True)
    for cmd, cols in (("de-validate", [("mean_gap", 4), ("max_gap", 5)]),
                      ("ge-validate", [("mean_common", 3), ("mean_distinct", 5)])):
        out = Path(args.outdir) / f"{cmd}.csv"
        code = cli([cmd, "--config", str(HERE / "configs" / f"{cmd.replace('-', '_')}.yaml"),
                    "--seed", str(args.seed), "--out", str(out)])
        if code:
            sys.exit(code)
        print(f"{cmd} -> {out}")
        summary(out, cols)


if __name__ == "__main__":
    main()
