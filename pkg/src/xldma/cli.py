"""Command-line entry point for the experiment harness.

Usage::

    xl-dma-est <subcommand> --config FILE --out DIR [--seed S] [--trials T]
               [--threads K]

Subcommands: ``model-error``, ``beam-gain``, ``nmse``, ``timing``,
``coherence``, and ``design`` (optimize and save a measurement design).
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, load_config
from .dictionaries import CapacityError
from .estimators import DegenerateSupportError
from . import harness

_COMMANDS = {
    "model-error": harness.run_model_error,
    "beam-gain": harness.run_beam_gain,
    "nmse": harness.run_nmse_sweep,
    "timing": harness.run_timing,
    "coherence": harness.run_coherence,
    "design": harness.build_and_save_design,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xl-dma-est",
        description="Near-field channel-estimation experiments for XL-DMA arrays")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="TOML config file (defaults reproduce the "
                            "reference protocol at desk scale)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, trials=args.trials,
                          threads=args.threads)
        runner = _COMMANDS[args.command]
        if args.command == "design":
            design = runner(cfg, args.out)
            print(f"saved {design.mode} design ({design.provenance}) "
                  f"to {args.out}")
        else:
            result = runner(cfg, args.out)
            rows = result[1]
            print(f"{args.command}: wrote {len(rows)} rows to {args.out}")
        return 0
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, DegenerateSupportError, CapacityError,
            FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
