"""Command-line entry point.

    robinshunt <command> --config <file> [--out <dir>] [--seed <u64>] [--deterministic]

Exit codes: 0 ran to completion (including "criterion not satisfied"
outcomes), 1 usage or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import io
from .errors import AssemblyError, ConfigurationError, DomainError, MeshError
from .experiments import COMMANDS, ExperimentSpec, run

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="robinshunt", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="key = value config file")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
    p.add_argument("--deterministic", action="store_true",
                   help="serial evaluation in a fixed order; byte-identical outputs")
    p.add_argument("--workers", type=int, default=None, help="worker processes for grid sweeps")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        values = io.read_config(args.config)
        spec = ExperimentSpec.from_mapping(
            args.command, values, out_dir=args.out, seed=args.seed,
            deterministic=args.deterministic or None, workers=args.workers,
        )
    except (OSError, ConfigurationError, DomainError, TypeError) as exc:
        print(f"robinshunt: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = run(spec)
    except (ConfigurationError, DomainError) as exc:
        print(f"robinshunt: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, MeshError, AssemblyError, FloatingPointError) as exc:
        print(f"robinshunt: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(result, default=str, sort_keys=True)[:2000])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
