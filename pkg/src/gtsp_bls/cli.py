"""Command line: ``gtsp-bls solve | bench | cluster``.

Exit codes: 0 success, 1 usage or parse error, 2 infeasible tour / failed validation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (
    ValidationFailure,
    bls_params_from,
    config_from_text,
    load_instance,
    parse_params,
    revalidate,
    run_benchmark,
    write_report,
)
from .clustering import ClusteringConfig, ClusteringError, cluster
from .instance import ParseError, PartitionError, format_gtsp, read_tsplib
from .memetic import MemeticParams, solve
from .report import compute_dev
from .tour import InfeasibleTourError

EXIT_OK, EXIT_USAGE, EXIT_INVALID = 0, 1, 2


def _cmd_solve(args) -> int:
    inst = load_instance(args.instance, best_known=args.best_known, m=args.m)
    values = parse_params(Path(args.params).read_text()) if args.params else {}
    p_mut = float(values.pop("p_mut", 0.3))
    time_limit = args.time_limit
    if time_limit is None and "time_limit" in values:
        time_limit = float(values.pop("time_limit"))
    values.pop("time_limit", None)
    params = MemeticParams(bls=bls_params_from(values), p_mut=p_mut)
    report = solve(inst, params, seed=args.seed, time_limit=time_limit)
    revalidate(report, inst)
    dev = "" if inst.best_known is None else f" dev={compute_dev(report.cost, inst.best_known):.2f}%"
    print(f"{inst.name} n={inst.n} m={inst.m} cost={report.cost}{dev} "
          f"generations={report.generations} descents={report.descents} time={report.wall_time:.2f}s")
    print(report.tour_text)
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = config_from_text(Path(args.config).read_text())
    if args.output:
        cfg.output = args.output
    if args.format:
        cfg.format = args.format
    report = run_benchmark(cfg, jobs=args.jobs)
    text = write_report(report, cfg)
    if not cfg.output:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_cluster(args) -> int:
    inst = cluster(read_tsplib(args.tsplib), ClusteringConfig(m=args.m, seed_rule=args.seed_rule))
    text = format_gtsp(inst)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtsp-bls", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the memetic search on one instance")
    p.add_argument("instance", help="clustered GTSP file, TSPLIB file, or benchmark name like 11eil51")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--best-known", type=int, default=None)
    p.add_argument("--params", help="key = value parameter file")
    p.add_argument("--time-limit", type=float, default=None, help="seconds")
    p.add_argument("--m", type=int, default=None, help="cluster count when clustering a TSPLIB file")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bench", help="repeated seeded runs and a results table")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("csv", "markdown"), default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("cluster", help="cluster a TSPLIB file into the GTSP format")
    p.add_argument("tsplib")
    p.add_argument("--m", type=int, default=None, help="cluster count (default ceil(n/5))")
    p.add_argument("--seed-rule", default="far-from-first", choices=("far-from-first", "farthest-pair"))
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_cluster)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (InfeasibleTourError, ValidationFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ParseError, PartitionError, ClusteringError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
