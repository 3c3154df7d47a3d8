"""Command-line entry point: ``wvtune <subcommand> [options]``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .errors import ConfigError, ParameterError, WVTuneError
from .experiments import ExperimentConfig, run, write_table

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

SUBCOMMANDS = {
    "known-sweep": "known-means-sweep",
    "synth-sweep": "synthetic-sweep",
    "de-validate": "de-validate",
    "ge-validate": "ge-validate",
    "tune": "tune-csv",
}


def load_config_file(path):
    """YAML or JSON mapping of ExperimentConfig fields."""
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a key-value mapping")
    data.pop("scenario", None)  # the subcommand decides
    return {k.replace("-", "_"): v for k, v in data.items()}


def build_parser():
    parser = argparse.ArgumentParser(prog="wvtune", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="YAML/JSON file with experiment settings")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output CSV path (default: stdout)")
        sp.add_argument("--reps", type=int)
        sp.add_argument("--alpha-min", type=float)
        sp.add_argument("--alpha-max", type=float)
        sp.add_argument("--alpha-step", type=float)
        sp.add_argument("--assume-common-cov", action="store_true", default=None)
        if name == "tune":
            sp.add_argument("--train", dest="train_csv")
            sp.add_argument("--test", dest="test_csv")
    return parser


def config_from_args(args):
    settings = load_config_file(args.config) if args.config else {}
    for key in ("seed", "out", "reps", "alpha_min", "alpha_max", "alpha_step",
                "assume_common_cov", "train_csv", "test_csv"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return ExperimentConfig.from_mapping(SUBCOMMANDS[args.command], settings)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = config_from_args(args)
        table = run(cfg)
        text = write_table(table, cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"wvtune: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WVTuneError as exc:
        print(f"wvtune: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if not cfg.out:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
