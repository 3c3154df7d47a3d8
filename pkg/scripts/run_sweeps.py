"""Average exact-error curves of alpha-tuned classifiers on synthetic data.

Runs every ``configs/*.yaml`` preset that describes a synthetic sweep (or the
ones named on the command line) through the CLI and prints the best alpha and
the relative error decrease against alpha = 1.

    python scripts/run_sweeps.py --reps 20            # desk-scale
    python scripts/run_sweeps.py common_lda_p400     # one preset, full reps
"""
import argparse
import sys
from pathlib import Path

from wvtune.cli import main as cli

HERE = Path(__file__).resolve().parent
SWEEPS = ["common_lda_p400", "common_lda_large_n", "distinct_lda_p400", "svm_fixed_penalty"]


def notes(path):
    out = {}
    for line in open(path):
        if line.startswith("# ") and ": " in line:
            k, v = line[2:].strip().split(": ", 1)
            out[k] = v
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("presets", nargs="*", default=SWEEPS)
    ap.add_argument("--reps", type=int, help="override the preset's replication count")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    Path(args.outdir).mkdir(parents=True, exist_ok=True)
    for name in args.presets:
        out = Path(args.outdir) / f"{name}.csv"
        argv = ["synth-sweep", "--config", str(HERE / "configs" / f"{name}.yaml"),
                "--seed", str(args.seed), "--out", str(out)]
        if args.reps:
            argv += ["--reps", str(args.reps)]
        code = cli(argv)
        if code:
            sys.exit(code)
        nt = notes(out)
        dec = 100 * float(nt.get("relative_decrease", "nan"))
        print(f"{name:22s} best alpha {float(nt['best_alpha']):6.3f}  "
              f"relative decrease {dec:5.1f}%  -> {out}")


if __name__ == "__main__":
    main()
