"""Makespan-optimal and distance-optimal planning loops.

The makespan planner deepens the expansion horizon one step at a time,
starting from the largest single-robot shortest-path length, and certifies
the first horizon whose flow model carries all n robots.  The distance
planner reuses that horizon: full mode expands to n times the optimal horizon
(where a globally distance-optimal schedule is guaranteed to fit) and
minimizes total cost; fixed mode minimizes cost at a caller-chosen horizon.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .core import MapfInstance, Solution, validate_solution
from .expansion import CostProfile, Flow, TimeExpandedNetwork, expand, flow_to_paths
from .ilp import IlpModel, build_dompp_model, build_tompp_model
from .solver import SolveOutcome, SolveStatus, SolverConfig, solve


class PlanError(RuntimeError):
    """Internal planning inconsistency (e.g. an undecodable optimal flow)."""


class PlanStatus(Enum):
    SOLVED = "solved"
    UNSOLVABLE = "unsolvable"
    UNSOLVABLE_AT_HORIZON = "unsolvable_at_horizon"
    LIMIT = "limit"


@dataclass(frozen=True)
class HorizonStats:
    horizon: int
    outcome: str
    objective: Optional[int]
    wall_time: float
    variables: int
    rows: int
    solver_nodes: int
    engine: str


@dataclass(frozen=True)
class PlanResult:
    status: PlanStatus
    solution: Optional[Solution] = None
    t_optimal: Optional[int] = None
    horizon: Optional[int] = None
    reason: Optional[str] = None
    failing_robot: Optional[int] = None
    stats: tuple[HorizonStats, ...] = ()
    repairs: tuple = ()  # per-repair telemetry from the local-repair heuristic
    at_goal_count: Optional[int] = None  # robots resting at goals when stopping

    @property
    def solved(self) -> bool:
        return self.status is PlanStatus.SOLVED


@dataclass(frozen=True)
class PlanConfig:
    solver: SolverConfig = field(default_factory=SolverConfig)
    cost_profile: CostProfile = field(default_factory=CostProfile)
    prune: bool = True
    # Horizon control: stop deepening after this many candidate horizons
    # (soundness: passing the configuration-count bound proves unsolvable;
    # stopping for any other reason is only a limit, never an unsolvable claim).
    t_max_override: Optional[int] = None
    configuration_ceiling: int = 100_000
    max_model_vars: int = 4_000_000
    validate: bool = True
    total_time_limit: Optional[float] = None  # across all horizons of one call


def makespan_lower_bound(instance: MapfInstance) -> tuple[Optional[int], Optional[int]]:
    """(bound, unreachable_robot): max single-robot distance, or the robot stuck."""
    bound = 0
    for robot in range(1, instance.n + 1):
        d = instance.motion_distance(instance.start_of(robot), instance.goal_of(robot))
        if d is None:
            return None, robot
        bound = max(bound, d)
    return bound, None


def configuration_bound(instance: MapfInstance, ceiling: int) -> Optional[int]:
    """Number of injective robot placements, or None once it exceeds the ceiling.

    A shortest solution never repeats a joint configuration, so its makespan
    is below this count; horizons up to it certify unsolvability.
    """
    total = 1
    v = instance.graph.vertex_count
    for i in range(instance.n):
        total *= v - i
        if total > ceiling:
            return None
    return total


def _decode(net: TimeExpandedNetwork, model: IlpModel, outcome: SolveOutcome,
            config: PlanConfig) -> Solution:
    assert outcome.assignment is not None
    values = outcome.assignment.values
    per_robot = []
    for robot in range(1, net.n + 1):
        base = (robot - 1) * net.arc_count
        per_robot.append(frozenset(
            a for a in range(net.arc_count) if values[base + a] == 1
        ))
    sol = flow_to_paths(net, Flow(tuple(per_robot)))
    if config.validate:
        report = validate_solution(net.instance, sol)
        if not report.ok:
            raise PlanError(f"decoded solution fails validation: "
                            f"{report.violations[0].detail}")
    return sol


def _run_solve(net: TimeExpandedNetwork, model: IlpModel, config: PlanConfig,
               deadline: Optional[float]) -> tuple[SolveOutcome, HorizonStats]:
    solver_config = config.solver
    if deadline is not None:
        remaining = max(0.05, deadline - time.monotonic())
        if solver_config.time_limit is None or solver_config.time_limit > remaining:
            solver_config = replace(solver_config, time_limit=remaining)
    started = time.monotonic()
    outcome = solve(model, solver_config)
    elapsed = time.monotonic() - started
    stats = HorizonStats(
        horizon=net.horizon,
        outcome=outcome.status.value,
        objective=outcome.assignment.objective if outcome.assignment else None,
        wall_time=elapsed,
        variables=model.num_vars,
        rows=len(model.rows),
        solver_nodes=outcome.nodes,
        engine=outcome.engine,
    )
    return outcome, stats


def tompp(instance: MapfInstance, config: PlanConfig = PlanConfig()) -> PlanResult:
    """Minimum-makespan planning by iterative horizon deepening.

    The first horizon whose model routes all n robots is the optimal makespan;
    every smaller horizon has been certified infeasible by the same solver.
    """
    t0, stuck = makespan_lower_bound(instance)
    if t0 is None:
        return PlanResult(PlanStatus.UNSOLVABLE, failing_robot=stuck,
                          reason=f"robot {stuck} cannot reach its goal")
    bound = configuration_bound(instance, config.configuration_ceiling)
    stats: list[HorizonStats] = []
    deadline = (None if config.total_time_limit is None
                else time.monotonic() + config.total_time_limit)
    horizon = t0
    while True:
        if deadline is not None and time.monotonic() > deadline:
            return PlanResult(PlanStatus.LIMIT, reason="total time limit reached",
                              stats=tuple(stats))
        if config.t_max_override is not None and horizon > config.t_max_override:
            return PlanResult(PlanStatus.LIMIT, reason="horizon override reached",
                              stats=tuple(stats))
        if bound is not None and horizon > bound:
            return PlanResult(PlanStatus.UNSOLVABLE,
                              reason=f"all horizons up to the configuration bound "
                                     f"{bound} are infeasible",
                              stats=tuple(stats))
        if bound is None and horizon > config.configuration_ceiling:
            return PlanResult(PlanStatus.LIMIT, reason="configuration ceiling reached",
                              stats=tuple(stats))
        net = expand(instance, horizon, config.cost_profile)
        if net.arc_count * instance.n > config.max_model_vars:
            return PlanResult(PlanStatus.LIMIT, reason="model size cap reached",
                              stats=tuple(stats))
        model = build_tompp_model(net, prune=config.prune)
        outcome, record = _run_solve(net, model, config, deadline)
        stats.append(record)
        if outcome.status is SolveStatus.LIMIT:
            return PlanResult(PlanStatus.LIMIT, reason=f"solver limit: {outcome.reason}",
                              stats=tuple(stats))
        if outcome.status is SolveStatus.INFEASIBLE:
            raise PlanError("the makespan model is always feasible (zero flow); "
                            "solver reported infeasible")
        assert outcome.assignment is not None
        if outcome.assignment.objective == instance.n:
            sol = _decode(net, model, outcome, config)
            if sol.makespan != horizon:
                # Tight: the bottleneck robot rules out anything below t0, and
                # every horizon before this one was certified infeasible.
                raise PlanError(f"decoded makespan {sol.makespan} != first "
                                f"feasible horizon {horizon}")
            return PlanResult(PlanStatus.SOLVED, solution=sol, t_optimal=horizon,
                              horizon=horizon, stats=tuple(stats))
        horizon += 1


def dompp(instance: MapfInstance, config: PlanConfig = PlanConfig(),
          fixed_horizon: Optional[int] = None,
          known_t_optimal: Optional[int] = None) -> PlanResult:
    """Minimum-total-distance planning.

    Full mode (fixed_horizon None) finds the optimal makespan T first, then
    minimizes total distance over horizon n*T, which suffices for a globally
    distance-optimal schedule.  Fixed mode minimizes distance among schedules
    of exactly the given horizon; an infeasible fixed horizon is reported as
    unsolvable-at-horizon, distinct from global unsolvability.
    """
    stats: list[HorizonStats] = []
    deadline = (None if config.total_time_limit is None
                else time.monotonic() + config.total_time_limit)
    if fixed_horizon is None:
        t_opt = known_t_optimal
        if t_opt is None:
            base = tompp(instance, config)
            stats.extend(base.stats)
            if not base.solved:
                return replace(base, stats=tuple(stats))
            assert base.t_optimal is not None
            t_opt = base.t_optimal
        horizon = instance.n * t_opt
    else:
        if fixed_horizon < 0:
            raise PlanError("fixed horizon must be non-negative")
        t_opt = None
        horizon = fixed_horizon
        t0, stuck = makespan_lower_bound(instance)
        if t0 is None:
            return PlanResult(PlanStatus.UNSOLVABLE, failing_robot=stuck,
                              reason=f"robot {stuck} cannot reach its goal")
        if horizon < t0:
            return PlanResult(PlanStatus.UNSOLVABLE_AT_HORIZON, horizon=horizon,
                              reason=f"horizon {horizon} is below the shortest-path "
                                     f"bound {t0}")
    net = expand(instance, horizon, config.cost_profile)
    if net.arc_count * instance.n > config.max_model_vars:
        return PlanResult(PlanStatus.LIMIT, reason="model size cap reached",
                          stats=tuple(stats))
    model = build_dompp_model(net, prune=config.prune)
    outcome, record = _run_solve(net, model, config, deadline)
    stats.append(record)
    if outcome.status is SolveStatus.LIMIT:
        return PlanResult(PlanStatus.LIMIT, reason=f"solver limit: {outcome.reason}",
                          stats=tuple(stats))
    if outcome.status is SolveStatus.INFEASIBLE:
        return PlanResult(PlanStatus.UNSOLVABLE_AT_HORIZON, horizon=horizon,
                          reason=f"no full routing exists at horizon {horizon}",
                          stats=tuple(stats))
    sol = _decode(net, model, outcome, config)
    assert outcome.assignment is not None
    if (config.cost_profile.stay_cost == 0
            and outcome.assignment.objective != sol.total_distance):
        raise PlanError("objective and decoded total distance disagree")
    return PlanResult(PlanStatus.SOLVED, solution=sol, t_optimal=t_opt,
                      horizon=horizon, stats=tuple(stats))
