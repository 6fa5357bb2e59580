"""Command-line entry point: ``divturbo run|compare|scatter|bench-one``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import harness
from .objectives import catalogue


def _cmd_run(args) -> int:
    config = harness.load_config(args.config)
    records = harness.run_experiment(config, args.out, workers=args.workers)
    harness.write_summary(records, args.out)
    failed = sum(1 for r in records if r.error)
    print(f"{len(records)} records in {args.out}/results.csv ({failed} failed)")
    return 0


def _cmd_compare(args) -> int:
    records = harness.read_results(args.results)
    if args.tau is not None:
        records = [r for r in records if r.tau == args.tau]
    sys.stdout.write(harness.format_summary(harness.summarize(records, args.alpha), args.format))
    return 0


def _cmd_scatter(args) -> int:
    records = harness.read_results(args.results)
    paths = harness.emit_scatter(records, args.function, args.out, tau=args.tau, svg=not args.no_svg)
    for p in paths:
        print(p)
    return 0


def _cmd_bench_one(args) -> int:
    objective = harness.make_objective(args.function, args.dim)
    budget = args.budget if args.budget is not None else harness.total_budget("paper", args.dim, args.m)
    result = harness.run_algorithm(args.algo, objective, args.tau, budget, args.m, args.seed, args.max_phases)
    elites = result.elites
    np.set_printoptions(precision=6, suppress=True)
    for i, (x, v, ok) in enumerate(zip(elites.points, elites.values, elites.flags)):
        print(f"{i:2d}  f={v:.10g}  feasible={ok}  x={x}")
    print(f"mean={np.mean(elites.values):.10g}  set_feasible={elites.is_feasible}  evals={result.evals_used}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="divturbo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="results")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("compare", help="print the summary table of a results file")
    p.add_argument("--results", required=True)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--tau", type=float)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("scatter", help="write 2-D contour grid and elite points")
    p.add_argument("--results", required=True)
    p.add_argument("--function", required=True, choices=catalogue())
    p.add_argument("--tau", type=float)
    p.add_argument("--out", default="scatter")
    p.add_argument("--no-svg", action="store_true")
    p.set_defaults(func=_cmd_scatter)

    p = sub.add_parser("bench-one", help="single run, prints elites and mean")
    p.add_argument("--function", required=True, choices=catalogue())
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--algo", choices=list(harness.ALGORITHMS), required=True)
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--max-phases", type=int, default=5)
    p.set_defaults(func=_cmd_bench_one)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
