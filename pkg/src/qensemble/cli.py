"""Command-line entry point: ``qensemble run|bench-xor|selftest|make-iris``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import _kernels
from .errors import QEnsembleError
from .harness.config import ExperimentConfig
from .harness.cv import monte_carlo_cv
from .harness.datasets import export_iris, xor_benchmark
from .harness.results import emit_results, summarize
from .selftest import run_selftest


def _print_summary(results) -> None:
    print(f"{'dataset':<28}{'norm':<8}{'kind':<10}{'d':>3}{'runs':>5}  single  internal  ensemble")
    for row in summarize(results):
        print(
            f"{row['dataset']:<28}{row['normalization']:<8}{row['kind']:<10}{row['d']:>3}{row['runs']:>5}"
            f"  {row['single_accuracy_mean']:.3f}   {row['internal_mean_accuracy_mean']:.3f}     {row['ensemble_accuracy_mean']:.3f}"
        )


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    results = monte_carlo_cv(cfg)
    paths = emit_results(results, cfg.output, cfg.format)
    _print_summary(results)
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_bench_xor(args) -> int:
    kinds = args.kinds.split(",")
    cfg = ExperimentConfig(
        datasets=["xor"], normalizations=["none"], kinds=kinds, d_values=[args.d],
        mode=args.mode, shots=args.shots, runs=args.runs, seed=args.seed,
    ).validate()
    results = monte_carlo_cv(cfg, {"xor": xor_benchmark(args.seed, args.size)})
    _print_summary(results)
    if args.output:
        for p in emit_results(results, args.output, "json" if args.output.endswith(".json") else "csv"):
            print(f"wrote {p}")
    return 0


def cmd_selftest(args) -> int:
    print(f"kernel backend: {_kernels.BACKEND}")
    return 0 if run_selftest(args.seed) else 1


def cmd_make_iris(args) -> int:
    for p in export_iris(args.out):
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qensemble", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Monte Carlo cross-validation from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench-xor", help="non-linearity check on a synthetic XOR set")
    p.add_argument("--size", type=int, default=60)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--kinds", default="swap,cosine,distance")
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_bench_xor)

    p = sub.add_parser("selftest", help="randomized invariant checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("make-iris", help="write the three two-class iris CSVs")
    p.add_argument("--out", default="data")
    p.set_defaults(func=cmd_make_iris)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except QEnsembleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
