"""Command-line front end.

Exit codes: 0 success / feasible, 1 infeasible or verification failure,
2 usage or input error, 3 enumeration or materialization budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from .bench import (ALGORITHMS, BenchmarkConfig, format_summary,
                    run_benchmark, summarize, write_csv)
from .bounds import gd_upper_bound, lower_bound
from .chains import schedule_from_chain, solve_chain
from .constraints import constraints_from_json
from .grouping import tga
from .oracle import (DEFAULT_STATE_BUDGET, StateBudgetExceeded,
                     extract_witness, optimal_channels)
from .schedule import ScheduleConstructionError, schedule_from_json, verify
from .schedulers import cas, gd, hs, stv

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

SCHEDULE_ALGORITHMS = ("tga", "aion", "gd", "hs", "stv", "cas", "exact")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _load_constraints(path: str):
    name, constraints = constraints_from_json(_read(path))
    return constraints


def _parse_gamma(text: str) -> Fraction:
    gamma = Fraction(text)
    if not 0 <= gamma < 1:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    return gamma


def _parse_n_values(tokens) -> tuple:
    out = []
    for token in tokens:
        if ":" in token:
            parts = token.split(":")
            if len(parts) != 3:
                raise ValueError(f"range syntax is lo:hi:step, got {token!r}")
            lo, hi, step = (int(p) for p in parts)
            if step < 1 or lo < 1 or hi < lo:
                raise ValueError(f"invalid range {token!r}")
            out.extend(range(lo, hi + 1, step))
        else:
            value = int(token)
            if value < 1:
                raise ValueError(f"n must be >= 1, got {value}")
            out.append(value)
    return tuple(out)


def _cmd_schedule(args) -> int:
    constraints = _load_constraints(args.input)
    if args.algorithm == "tga":
        schedule, _, _ = tga(constraints, _parse_gamma(args.gamma))
    elif args.algorithm == "aion":
        schedule = schedule_from_chain(solve_chain(constraints))
    elif args.algorithm == "gd":
        schedule = gd(constraints)
    elif args.algorithm == "hs":
        schedule = hs(constraints)
    elif args.algorithm == "stv":
        values = constraints.distinct_values
        if len(values) != 2:
            raise ValueError("stv needs exactly two distinct deadline values")
        schedule = stv(values[0], constraints.occurrences[0],
                       values[1], constraints.occurrences[1])
    elif args.algorithm == "cas":
        schedule = cas(constraints)
    else:  # exact
        best = optimal_channels(constraints, args.state_budget)
        schedule = extract_witness(constraints, best, args.state_budget)
    _write(args.output, schedule.materialize(args.max_cells).to_json())
    return EXIT_OK


def _cmd_verify(args) -> int:
    schedule = schedule_from_json(_read(args.schedule))
    constraints = _load_constraints(args.constraints)
    report = verify(schedule, constraints)
    _write(args.output, json.dumps({
        "feasible": report.feasible,
        "violations": [list(v) for v in report.violations],
        "channel_conflicts": [list(c) for c in report.channel_conflicts],
        "lower_bound": report.lower_bound,
        "meets_lower_bound": report.meets_lower_bound,
    }, sort_keys=True, indent=2))
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def _cmd_bound(args) -> int:
    constraints = _load_constraints(args.input)
    payload = {"lower_bound": lower_bound(constraints),
               "gd_upper_bound": gd_upper_bound(constraints)}
    if args.format == "json":
        _write(args.output, json.dumps(payload, sort_keys=True, indent=2))
    else:
        _write(args.output, f"lower_bound={payload['lower_bound']} "
                            f"gd_upper_bound={payload['gd_upper_bound']}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    constraints = _load_constraints(args.input)
    best = optimal_channels(constraints, args.state_budget)
    witness = extract_witness(constraints, best, args.state_budget)
    _write(args.output, json.dumps({
        "optimal_channels": best,
        "witness": witness.to_json_dict(),
    }, sort_keys=True, indent=2))
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = BenchmarkConfig(
        n_values=_parse_n_values(args.n),
        d_min=args.d_min,
        d_max=args.d_max,
        instances=args.instances,
        seed=args.seed,
        gamma=_parse_gamma(args.gamma),
        algorithms=tuple(args.algorithms.split(",")),
        time_budget=args.time_budget,
        state_budget=args.state_budget,
    )
    if args.output and args.output != "-":
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            records = write_csv(run_benchmark(cfg), fh)
    else:
        records = write_csv(run_benchmark(cfg), sys.stdout)
    summary = summarize(records)
    if args.format == "json":
        print(json.dumps(summary, sort_keys=True, indent=2), file=sys.stderr)
    else:
        print(format_summary(summary), file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoisched",
        description="Synthesize and check cyclic schedules that keep every "
                    "source's age of information within its deadline.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="construct a schedule for a constraints file")
    p.add_argument("--algorithm", choices=SCHEDULE_ALGORITHMS, required=True)
    p.add_argument("--input", "-i", required=True,
                   help="constraints JSON file ('-' for stdin)")
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--gamma", default="1/2")
    p.add_argument("--state-budget", type=int, default=DEFAULT_STATE_BUDGET)
    p.add_argument("--max-cells", type=int, default=10_000_000,
                   help="largest concrete grid to materialize")
    p.set_defaults(fn=_cmd_schedule)

    p = sub.add_parser("verify", help="check a schedule against constraints")
    p.add_argument("--schedule", "-s", required=True)
    p.add_argument("--constraints", "-c", required=True)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("bound", help="print lower and distinct-value upper bounds")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(fn=_cmd_bound)

    p = sub.add_parser("oracle", help="exact optimum with a witness schedule")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--state-budget", type=int, default=DEFAULT_STATE_BUDGET)
    p.set_defaults(fn=_cmd_oracle)

    p = sub.add_parser("bench", help="run the random-instance benchmark")
    p.add_argument("--n", action="append", required=True,
                   help="source count, repeatable; ranges as lo:hi:step")
    p.add_argument("--d-min", type=int, default=2)
    p.add_argument("--d-max", type=int, default=10)
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--gamma", default="1/2")
    p.add_argument("--algorithms", default="lb,gd,aion,tga",
                   help=f"comma-separated subset of {','.join(ALGORITHMS)}")
    p.add_argument("--output", "-o", default=None, help="CSV path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="summary format (summary goes to stderr)")
    p.add_argument("--time-budget", type=float, default=None,
                   help="per-algorithm wall-time budget per instance, seconds")
    p.add_argument("--state-budget", type=int, default=DEFAULT_STATE_BUDGET)
    p.set_defaults(fn=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except StateBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ScheduleConstructionError as exc:
        message = str(exc)
        if "materializing" in message:
            print(f"error: {message}", file=sys.stderr)
            return EXIT_BUDGET
        print(f"internal error: {message}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
