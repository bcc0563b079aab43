"""Benchmark sweeps: seeded instance generation, runs, records, text tables.

A sweep spec is a JSON object::

    {
      "name": "demo",
      "grid": {"width": 10, "height": 8, "obstacles": [0.1], "robots": [5]},
      "seeds": 3,
      "algorithms": ["tompp", "dompp-fixed"],
      "time_limit": 30.0,
      "stay_cost": 0,
      "variant": "forbid_headon",
      "table": "grid"
    }

Every run yields one machine-readable record; identical specs and seeds give
identical records apart from the timing fields.  Tables: "grid" prints mean
seconds and mean optimal steps per (obstacle, robots) cell with a success
superscript, "distance" prints the decoupled lower bound against the
distance- and makespan-planner path lengths, "heuristic" prints runtime,
fully-solved counts, and mean percent of goals reached.
"""
from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from .core import MapfInstance, MotionRule
from .expansion import CostProfile
from .fixtures import gen_grid_instance
from .formats import format_instance
from .heuristic import RepairConfig, local_repair_solve
from .planner import PlanConfig, PlanResult, tompp, dompp
from .solver import SolverConfig

ALGORITHMS = ("tompp", "dompp-full", "dompp-fixed", "heuristic")


class BenchError(ValueError):
    """Malformed sweep specification."""


def instance_hash(instance: MapfInstance) -> str:
    return hashlib.sha256(format_instance(instance).encode()).hexdigest()[:12]


def disjoint_lower_bound(instance: MapfInstance) -> int:
    total = 0
    for robot in range(1, instance.n + 1):
        d = instance.motion_distance(instance.start_of(robot), instance.goal_of(robot))
        if d is None:
            raise BenchError(f"robot {robot} cannot reach its goal")
        total += d
    return total


def run_algorithm(instance: MapfInstance, algo: str,
                  time_limit: Optional[float] = None,
                  stay_cost: int = 0) -> tuple[PlanResult, float]:
    config = PlanConfig(
        solver=SolverConfig(time_limit=time_limit),
        cost_profile=CostProfile(stay_cost=stay_cost),
        total_time_limit=time_limit,
    )
    started = time.monotonic()
    if algo == "tompp":
        result = tompp(instance, config)
    elif algo == "dompp-full":
        result = dompp(instance, config)
    elif algo == "dompp-fixed":
        base = tompp(instance, config)
        if base.solved:
            result = dompp(instance, config, fixed_horizon=base.t_optimal)
        else:
            result = base
    elif algo == "heuristic":
        result = local_repair_solve(instance, RepairConfig(), time_limit=time_limit)
    else:
        raise BenchError(f"unknown algorithm {algo!r} (expected one of {ALGORITHMS})")
    return result, time.monotonic() - started


def _record(index: int, instance: MapfInstance, params: dict, algo: str,
            result: PlanResult, elapsed: float) -> dict:
    solution = result.solution
    n = instance.n
    if result.at_goal_count is not None:
        goals_pct = 100.0 * result.at_goal_count / n
    else:
        goals_pct = 100.0 if result.solved else 0.0
    return {
        "index": index,
        "instance": instance_hash(instance),
        **params,
        "algo": algo,
        "outcome": result.status.value,
        "reason": result.reason,
        "t_optimal": result.t_optimal,
        "makespan": solution.makespan if solution else None,
        "distance": solution.total_distance if solution else None,
        "disjoint": disjoint_lower_bound(instance),
        "goals_reached_pct": round(goals_pct, 1),
        "time": round(elapsed, 4),
    }


def _seed_list(seeds) -> list[int]:
    if isinstance(seeds, int):
        return list(range(1, seeds + 1))
    return [int(s) for s in seeds]


def run_benchmark(spec: dict, workers: int = 1) -> tuple[list[dict], str]:
    """Run the sweep; returns (records in job order, rendered text table)."""
    try:
        grid = spec["grid"]
        width, height = int(grid["width"]), int(grid["height"])
        obstacles = [float(p) for p in grid.get("obstacles", [0.0])]
        robot_counts = [int(r) for r in grid.get("robots", [1])]
        seeds = _seed_list(spec.get("seeds", 1))
        algorithms = list(spec.get("algorithms", ["tompp"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise BenchError(f"bad sweep spec: {exc}") from None
    time_limit = spec.get("time_limit")
    stay_cost = int(spec.get("stay_cost", 0))
    rule = MotionRule.from_label(spec.get("variant", "forbid_headon"))
    for algo in algorithms:
        if algo not in ALGORITHMS:
            raise BenchError(f"unknown algorithm {algo!r}")

    jobs = []
    for pct in obstacles:
        for count in robot_counts:
            for seed in seeds:
                for algo in algorithms:
                    jobs.append((pct, count, seed, algo))

    def run_one(job_index: int) -> dict:
        pct, count, seed, algo = jobs[job_index]
        params = {"width": width, "height": height, "obstacles": pct,
                  "robots": count, "seed": seed}
        try:
            instance = gen_grid_instance(width, height, pct, count, seed, rule=rule)
        except Exception as exc:
            return {"index": job_index, **params, "algo": algo,
                    "outcome": "generation_error", "reason": str(exc)}
        try:
            result, elapsed = run_algorithm(instance, algo, time_limit, stay_cost)
            return _record(job_index, instance, params, algo, result, elapsed)
        except Exception as exc:  # record, never abort the sweep
            return {"index": job_index, "instance": instance_hash(instance),
                    **params, "algo": algo, "outcome": "error", "reason": str(exc)}

    if workers <= 1:
        records = [run_one(i) for i in range(len(jobs))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_one, range(len(jobs))))
    records.sort(key=lambda r: r["index"])
    table = render_table(spec.get("table", "grid"), records,
                         obstacles, robot_counts, len(seeds))
    return records, table


def write_records(records: list[dict], path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else float("nan")


def _cell(records: list[dict]) -> str:
    solved = [r for r in records if r.get("outcome") == "solved"]
    if not solved:
        return "N/A"
    text = f"{_mean([r['time'] for r in solved]):.2f}" \
           f"({_mean([r['makespan'] for r in solved]):.0f})"
    if len(solved) < len(records):
        text += f"^{len(solved)}"
    return text


def render_table(style: str, records: list[dict], obstacles: list[float],
                 robot_counts: list[int], seed_count: int) -> str:
    if style == "grid":
        return _grid_table(records, obstacles, robot_counts)
    if style == "distance":
        return _distance_table(records, obstacles)
    if style == "heuristic":
        return _heuristic_table(records, robot_counts)
    raise BenchError(f"unknown table style {style!r}")


def _grid_table(records, obstacles, robot_counts) -> str:
    header = ["% obs"] + [str(c) for c in robot_counts]
    rows = [header]
    for pct in obstacles:
        row = [f"{100 * pct:.0f}"]
        for count in robot_counts:
            cell_records = [r for r in records
                            if r.get("obstacles") == pct and r.get("robots") == count]
            row.append(_cell(cell_records))
        rows.append(row)
    return _format_rows(rows)


def _distance_table(records, obstacles) -> str:
    rows = [["", *[f"{100 * p:.0f}% obs" for p in obstacles]]]
    for label, key, algo in (("Disjoint", "disjoint", None),
                             ("Distance-opt", "distance", "dompp-fixed"),
                             ("Makespan-opt", "distance", "tompp")):
        row = [label]
        for pct in obstacles:
            sel = [r for r in records if r.get("obstacles") == pct
                   and r.get("outcome") == "solved"
                   and (algo is None or r.get("algo") == algo)]
            if algo is None:
                # one bound per instance, not per algorithm run
                unique = {r["instance"]: r[key] for r in sel}
                row.append(f"{_mean(list(unique.values())):.2f}" if unique else "N/A")
            else:
                row.append(f"{_mean([r[key] for r in sel]):.2f}" if sel else "N/A")
        rows.append(row)
    return _format_rows(rows)


def _heuristic_table(records, robot_counts) -> str:
    rows = [["", *[str(c) for c in robot_counts]]]
    for label, fn in (
        ("Running time (s)", lambda sel: f"{_mean([r['time'] for r in sel]):.2f}"),
        ("Fully solved", lambda sel: str(sum(1 for r in sel if r['outcome'] == 'solved'))),
        ("% goals reached", lambda sel: f"{_mean([r.get('goals_reached_pct', 0.0) for r in sel]):.1f}"),
    ):
        row = [label]
        for count in robot_counts:
            sel = [r for r in records if r.get("robots") == count
                   and r.get("algo") == "heuristic"]
            row.append(fn(sel) if sel else "N/A")
        rows.append(row)
    return _format_rows(rows)


def _format_rows(rows: list[list[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines) + "\n"
