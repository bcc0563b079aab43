"""Command-line interface.

Exit codes: 0 solved/valid, 1 invalid solution, 2 unsolvable,
3 limit reached, 4 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import ALGORITHMS, run_algorithm, run_benchmark, write_records
from .core import MotionRule, validate_solution
from .expansion import CostProfile, expand
from .fixtures import gen_grid_instance, tradeoff_instance
from .formats import (
    FormatError,
    format_instance,
    format_solution,
    parse_instance,
    parse_solution,
)
from .ilp import build_dompp_model, build_tompp_model, export_lp
from .planner import PlanStatus
from .puzzle import (
    PuzzleState,
    branching_counts,
    bfs_solve,
    constructive_solve,
    enumerate_cycles,
    random_state,
    state_from_text,
    state_to_text,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNSOLVABLE = 2
EXIT_LIMIT = 3
EXIT_INPUT = 4


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _moves_text(moves) -> str:
    lines = [f"moves {len(moves)}"]
    for move in moves:
        parts = []
        for cycle, direction in zip(move.cycles, move.directions):
            sign = "+" if direction == 1 else "-"
            parts.append(sign + ":" + "-".join(str(c) for c in cycle))
        lines.append("; ".join(parts))
    return "\n".join(lines) + "\n"


def cmd_gen(args) -> int:
    if args.tradeoff is not None:
        instance = tradeoff_instance(args.tradeoff)
    else:
        instance = gen_grid_instance(
            args.width, args.height, args.obstacles, args.robots, args.seed,
            rule=MotionRule.from_label(args.variant),
        )
    _write(format_instance(instance), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = parse_instance(_read(args.instance))
    result, elapsed = run_algorithm(
        instance, args.algo, time_limit=args.time_limit, stay_cost=args.stay_cost
    )
    if args.algo == "dompp-fixed" and args.fixed_t is not None:
        from .planner import PlanConfig, dompp
        from .solver import SolverConfig

        result = dompp(
            instance,
            PlanConfig(solver=SolverConfig(time_limit=args.time_limit),
                       cost_profile=CostProfile(stay_cost=args.stay_cost),
                       total_time_limit=args.time_limit),
            fixed_horizon=args.fixed_t,
        )
    if result.solved:
        assert result.solution is not None
        _write(format_solution(result.solution), args.out)
        print(f"solved makespan={result.solution.makespan} "
              f"distance={result.solution.total_distance} "
              f"horizon={result.horizon}", file=sys.stderr)
        return EXIT_OK
    print(f"{result.status.value}: {result.reason}", file=sys.stderr)
    if result.status in (PlanStatus.UNSOLVABLE, PlanStatus.UNSOLVABLE_AT_HORIZON):
        return EXIT_UNSOLVABLE
    return EXIT_LIMIT


def cmd_validate(args) -> int:
    instance = parse_instance(_read(args.instance))
    solution = parse_solution(_read(args.solution))
    report = validate_solution(instance, solution)
    if report.ok:
        print(f"valid makespan={report.makespan} distance={report.total_distance}")
        return EXIT_OK
    for violation in report.violations:
        print(f"violation {violation.kind} t={violation.time} "
              f"robots={list(violation.robots)}: {violation.detail}")
    return EXIT_INVALID


def cmd_puzzle(args) -> int:
    if args.action == "random":
        state = random_state(args.n, args.seed)
        _write(state_to_text(state) + "\n", args.out)
        return EXIT_OK
    if args.action == "cycles":
        counts = branching_counts(args.n)
        cycles = enumerate_cycles(args.n)
        lines = [f"{key} {value}" for key, value in counts.items()]
        if args.list_cycles:
            lines += ["-".join(str(c) for c in cycle) for cycle in cycles]
        _write("\n".join(lines) + "\n", args.out)
        return EXIT_OK
    state = state_from_text(_read(args.state))
    if args.action == "bfs":
        moves = bfs_solve(state)
    else:
        moves = constructive_solve(state)
    _write(_moves_text(moves), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = json.loads(_read(args.spec))
    records, table = run_benchmark(spec, workers=args.workers)
    if args.out:
        write_records(records, args.out)
    sys.stdout.write(table)
    failures = [r for r in records if r.get("outcome") in ("error", "generation_error")]
    if failures:
        print(f"{len(failures)} runs failed; see records", file=sys.stderr)
    return EXIT_OK


def cmd_export_lp(args) -> int:
    instance = parse_instance(_read(args.instance))
    net = expand(instance, args.horizon, CostProfile(stay_cost=args.stay_cost))
    if args.model == "tompp":
        model = build_tompp_model(net, prune=not args.no_prune)
    else:
        model = build_dompp_model(net, prune=not args.no_prune)
    if args.out is None or args.out == "-":
        export_lp(model, sys.stdout.buffer)
    else:
        with open(args.out, "wb") as fh:
            export_lp(model, fh)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapflow",
        description="Optimal multi-robot path planning via time-expanded flow models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark instance")
    p.add_argument("--width", type=int, default=10)
    p.add_argument("--height", type=int, default=10)
    p.add_argument("--obstacles", type=float, default=0.0)
    p.add_argument("--robots", type=int, default=2)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--variant", default="forbid_headon",
                   choices=[r.value for r in MotionRule])
    p.add_argument("--tradeoff", type=int, default=None, metavar="T",
                   help="emit the two-route tradeoff instance for gap T instead")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("solve", help="plan paths for an instance file")
    p.add_argument("instance")
    p.add_argument("--algo", default="tompp", choices=ALGORITHMS)
    p.add_argument("--fixed-t", type=int, default=None,
                   help="horizon for dompp-fixed (default: optimal makespan)")
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--stay-cost", type=int, default=0, choices=(0, 1))
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("validate", help="check a solution file against an instance")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("puzzle", help="square-puzzle utilities")
    p.add_argument("action", choices=("random", "bfs", "constructive", "cycles"))
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--state", default="-",
                   help="puzzle state file for bfs/constructive ('-' = stdin)")
    p.add_argument("--list-cycles", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_puzzle)

    p = sub.add_parser("bench", help="run a benchmark sweep from a JSON spec")
    p.add_argument("spec")
    p.add_argument("--out", default=None, help="write JSON-lines records here")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("export-lp", help="write a solver-ready LP file")
    p.add_argument("instance")
    p.add_argument("--model", default="tompp", choices=("tompp", "dompp"))
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--stay-cost", type=int, default=0, choices=(0, 1))
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_export_lp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (FormatError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
