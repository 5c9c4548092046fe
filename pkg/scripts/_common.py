"""Shared argument handling for the experiment scripts."""

import argparse
import json
import logging
import time

from robinshunt.experiments import ExperimentSpec, run


def parser(description: str, out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default=out, help=f"output directory (default: {out})")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def execute(command: str, values: dict, args) -> dict:
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    spec = ExperimentSpec.from_mapping(command, values, out_dir=args.out, seed=args.seed,
                                       workers=args.workers)
    start = time.perf_counter()
    result = run(spec)
    logging.info("%s finished in %.1fs, outputs in %s", command, time.perf_counter() - start, spec.out_dir)
    print(json.dumps(result, indent=2, default=str)[:4000])
    return result
