"""Decoupled planning with local conflict repair.

Robots first get independent shortest paths and walk them greedily; whenever
nobody can advance, the stalled robots' neighborhoods (graph balls of the
current radius) become small sub-instances that the exact makespan planner
resolves, and the fixed windows are spliced back into the global schedule.
Repeated stalls grow the radius, up to the whole graph, which preserves
completeness; the result is feasible but not optimal.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    DiagonalSquare,
    Graph,
    MapfInstance,
    MotionRule,
    Solution,
    bfs_distances,
    normalize_edge,
    validate_solution,
)
from .planner import PlanConfig, PlanResult, PlanStatus, tompp
from .solver import SolverConfig


class HeuristicError(ValueError):
    """Unusable input for decoupled planning (e.g. unreachable goal)."""


@dataclass(frozen=True)
class RepairConfig:
    radius: int = 2
    radius_growth: int = 1
    window_time_limit: Optional[float] = 10.0
    max_repairs: int = 200

    def __post_init__(self) -> None:
        if self.radius < 1 or self.radius_growth < 1 or self.max_repairs < 1:
            raise HeuristicError("radius, growth, and repair cap must be positive")


@dataclass(frozen=True)
class RepairRecord:
    radius: int
    region_size: int
    robots: int
    local_horizon: int
    solve_time: float
    remaining_before: int
    remaining_after: int


def shortest_path_to_goal(instance: MapfInstance, robot: int,
                          source: Optional[int] = None) -> tuple[int, ...]:
    """Single-robot shortest path, ties broken by the smallest next vertex id."""
    goal = instance.goal_of(robot)
    start = instance.start_of(robot) if source is None else source
    dist = bfs_distances(instance.motion_adjacency, goal)
    if dist[start] is None:
        raise HeuristicError(f"robot {robot} cannot reach its goal from {start}")
    path = [start]
    cur = start
    while cur != goal:
        here = dist[cur]
        assert here is not None
        nxt = min(
            w for w in instance.motion_adjacency[cur]
            if dist[w] is not None and dist[w] == here - 1
        )
        path.append(nxt)
        cur = nxt
    return tuple(path)


def decoupled_paths(instance: MapfInstance) -> tuple[tuple[int, ...], ...]:
    """Per-robot shortest paths ignoring all other robots."""
    return tuple(
        shortest_path_to_goal(instance, robot) for robot in range(1, instance.n + 1)
    )


def _induced_instance(instance: MapfInstance, region: list[int],
                      starts: list[int], goals: list[int]) -> tuple[MapfInstance, dict[int, int]]:
    relabel = {v: i for i, v in enumerate(region)}
    edges = frozenset(
        normalize_edge(relabel[u], relabel[v])
        for (u, v) in instance.graph.edges
        if u in relabel and v in relabel
    )
    diagonals = tuple(
        DiagonalSquare(
            normalize_edge(relabel[sq.first[0]], relabel[sq.first[1]]),
            normalize_edge(relabel[sq.second[0]], relabel[sq.second[1]]),
        )
        for sq in instance.diagonals
        if all(v in relabel for v in sq.corners)
    )
    sub = MapfInstance(
        Graph(len(region), edges),
        tuple(relabel[s] for s in starts),
        tuple(relabel[g] for g in goals),
        rule=instance.rule,
        diagonals=diagonals if instance.rule is MotionRule.GRID_DIAGONAL else (),
    )
    return sub, relabel


class _Simulation:
    def __init__(self, instance: MapfInstance, config: RepairConfig):
        self.instance = instance
        self.config = config
        self.pos = list(instance.starts)
        self.trails = [[s] for s in instance.starts]
        self.plans = [list(shortest_path_to_goal(instance, robot))
                      for robot in range(1, instance.n + 1)]
        self.radius = config.radius
        self.repairs: list[RepairRecord] = []
        self.stats = []
        self.seen_stalls: set[tuple[int, ...]] = set()

    def remaining(self) -> int:
        return sum(len(p) - 1 for p in self.plans)

    def at_goal_count(self) -> int:
        return sum(1 for i in range(self.instance.n)
                   if self.pos[i] == self.instance.goals[i])

    def done(self) -> bool:
        return all(len(p) == 1 for p in self.plans) and all(
            self.pos[i] == self.instance.goals[i] for i in range(self.instance.n)
        )

    def advance_step(self) -> bool:
        """One synchronized step; True if at least one robot moved.

        A robot advances when its next vertex will be free and no head-on
        (or diagonal-crossing) conflict arises with already-granted moves.
        """
        n = self.instance.n
        nxt = list(self.pos)
        moving = [False] * n
        allow_headon = self.instance.rule is MotionRule.ALLOW_HEAD_ON
        changed = True
        while changed:
            changed = False
            occupied = {}
            for j in range(n):
                occupied.setdefault(nxt[j], []).append(j)
            for i in range(n):
                if moving[i] or len(self.plans[i]) <= 1:
                    continue
                target = self.plans[i][1]
                if any(j != i for j in occupied.get(target, [])):
                    continue
                if not allow_headon:
                    swap = [j for j in range(n)
                            if j != i and self.pos[j] == target and nxt[j] == self.pos[i]]
                    if swap:
                        continue
                if self.instance.rule is MotionRule.GRID_DIAGONAL:
                    if self._diagonal_blocked(i, target, nxt, moving):
                        continue
                moving[i] = True
                nxt[i] = target
                changed = True
                occupied.setdefault(target, []).append(i)
        if not any(moving):
            return False
        for i in range(n):
            if moving[i]:
                self.plans[i].pop(0)
            self.pos[i] = nxt[i]
            self.trails[i].append(nxt[i])
        return True

    def _diagonal_blocked(self, robot: int, target: int, nxt: list[int],
                          moving: list[bool]) -> bool:
        step = normalize_edge(self.pos[robot], target)
        if self.instance.graph.has_edge(*step):
            return False
        for idx, sq in enumerate(self.instance.diagonals):
            if step not in (sq.first, sq.second):
                continue
            for j in range(self.instance.n):
                if j == robot or not moving[j]:
                    continue
                other = normalize_edge(self.pos[j], nxt[j])
                if other in (sq.first, sq.second):
                    return True
            return False
        return True  # undeclared diagonal step is never legal

    def stall_regions(self) -> list[list[int]]:
        stalled = [i for i in range(self.instance.n) if len(self.plans[i]) > 1]
        adjacency = self.instance.graph.adjacency
        ball: set[int] = set()
        for i in stalled:
            dist = bfs_distances(adjacency, self.pos[i])
            ball.update(v for v, d in enumerate(dist)
                        if d is not None and d <= self.radius)
        # connected components of the induced region
        components = []
        unvisited = set(ball)
        while unvisited:
            seed = min(unvisited)
            comp = {seed}
            frontier = [seed]
            while frontier:
                u = frontier.pop()
                for w in adjacency[u]:
                    if w in unvisited and w not in comp:
                        comp.add(w)
                        frontier.append(w)
            unvisited -= comp
            components.append(sorted(comp))
        return [c for c in components if any(self.pos[i] in c for i in range(self.instance.n))]

    def assign_local_goals(self, component: list[int],
                           robots: list[int]) -> Optional[list[int]]:
        comp_set = set(component)
        taken: set[int] = set()
        goals = []
        goal_dist_cache: dict[int, list] = {}
        for i in robots:
            goal = self.instance.goals[i]
            candidate = None
            if goal in comp_set and goal not in taken:
                candidate = goal
            else:
                prefix_end = self.plans[i][0]
                for v in self.plans[i]:
                    if v not in comp_set:
                        break
                    prefix_end = v
                if prefix_end not in taken:
                    candidate = prefix_end
            if candidate is None:
                if goal not in goal_dist_cache:
                    goal_dist_cache[goal] = bfs_distances(
                        self.instance.motion_adjacency, goal)
                dist = goal_dist_cache[goal]
                free = [v for v in component if v not in taken and dist[v] is not None]
                if not free:
                    return None
                candidate = min(free, key=lambda v: (dist[v], v))
            taken.add(candidate)
            goals.append(candidate)
        return goals

    def repair(self, deadline: Optional[float]) -> Optional[PlanResult]:
        """Resolve one stall; None on success, a terminal PlanResult otherwise."""
        config_key = tuple(self.pos)
        if config_key in self.seen_stalls:
            self.radius += self.config.radius_growth
        self.seen_stalls.add(config_key)
        whole = self.instance.graph.vertex_count
        while True:
            if len(self.repairs) >= self.config.max_repairs:
                return PlanResult(PlanStatus.LIMIT, reason="repair cap reached",
                                  stats=tuple(self.stats), repairs=tuple(self.repairs),
                                  at_goal_count=self.at_goal_count())
            if deadline is not None and time.monotonic() > deadline:
                return PlanResult(PlanStatus.LIMIT, reason="time limit reached",
                                  stats=tuple(self.stats), repairs=tuple(self.repairs),
                                  at_goal_count=self.at_goal_count())
            remaining_before = self.remaining()
            regions = self.stall_regions()
            windows = []
            feasible = True
            for component in regions:
                robots = [i for i in range(self.instance.n) if self.pos[i] in component]
                goals = self.assign_local_goals(component, robots)
                if goals is None:
                    feasible = False
                    break
                starts = [self.pos[i] for i in robots]
                sub, relabel = _induced_instance(self.instance, component, starts, goals)
                windows.append((component, robots, sub, relabel))
            results = []
            if feasible:
                for component, robots, sub, relabel in windows:
                    started = time.monotonic()
                    result = tompp(sub, PlanConfig(
                        solver=SolverConfig(time_limit=self.config.window_time_limit),
                    ))
                    elapsed = time.monotonic() - started
                    results.append((component, robots, sub, result, elapsed))
                    self.stats.extend(result.stats)
                    if not result.solved:
                        feasible = False
                        break
            if feasible:
                horizon = max((r.solution.horizon for *_, r, _ in results
                               if r.solution is not None), default=0)
                if horizon > 0:
                    self._splice(results, horizon)
                    self.repairs.append(RepairRecord(
                        radius=self.radius,
                        region_size=sum(len(c) for c, *_ in results),
                        robots=sum(len(r) for _, r, *_ in results),
                        local_horizon=horizon,
                        solve_time=sum(e for *_, e in results),
                        remaining_before=remaining_before,
                        remaining_after=self.remaining(),
                    ))
                    return None
                # A zero-step repair is no progress; widen and retry.
            if self.radius >= whole:
                # The region was the entire graph: the window WAS a full exact
                # solve from the current configuration.
                for *_, result, _ in results:
                    if not result.solved and result.status is not PlanStatus.LIMIT:
                        return PlanResult(PlanStatus.UNSOLVABLE,
                                          reason="exact fallback proved unsolvable",
                                          stats=tuple(self.stats),
                                          repairs=tuple(self.repairs))
                return PlanResult(PlanStatus.LIMIT, reason="exact fallback hit a limit",
                                  stats=tuple(self.stats), repairs=tuple(self.repairs),
                                  at_goal_count=self.at_goal_count())
            self.radius = min(whole, self.radius + self.config.radius_growth)

    def _splice(self, results, horizon: int) -> None:
        inside: set[int] = set()
        for component, robots, sub, result, _ in results:
            assert result.solution is not None
            region = list(component)
            for k, i in enumerate(robots):
                inside.add(i)
                local = result.solution.path_of(k + 1)
                absolute = [region[v] for v in local]
                padded = absolute + [absolute[-1]] * (horizon - (len(absolute) - 1))
                for v in padded[1:]:
                    self.trails[i].append(v)
                self.pos[i] = padded[-1]
        for i in range(self.instance.n):
            if i not in inside:
                self.trails[i].extend([self.pos[i]] * horizon)
        for i in range(self.instance.n):
            self.plans[i] = list(shortest_path_to_goal(
                self.instance, i + 1, source=self.pos[i]))


def local_repair_solve(instance: MapfInstance,
                       config: RepairConfig = RepairConfig(),
                       time_limit: Optional[float] = None) -> PlanResult:
    """Decoupled simulation with exact local repair; Solved results validate."""
    try:
        sim = _Simulation(instance, config)
    except HeuristicError:
        # identify the robot for the caller
        for robot in range(1, instance.n + 1):
            if instance.motion_distance(instance.start_of(robot),
                                        instance.goal_of(robot)) is None:
                return PlanResult(PlanStatus.UNSOLVABLE, failing_robot=robot,
                                  reason=f"robot {robot} cannot reach its goal")
        raise
    deadline = None if time_limit is None else time.monotonic() + time_limit
    while not sim.done():
        if deadline is not None and time.monotonic() > deadline:
            return PlanResult(PlanStatus.LIMIT, reason="time limit reached",
                              stats=tuple(sim.stats), repairs=tuple(sim.repairs),
                              at_goal_count=sim.at_goal_count())
        if sim.advance_step():
            continue
        terminal = sim.repair(deadline)
        if terminal is not None:
            return terminal
    solution = Solution(tuple(tuple(t) for t in sim.trails))
    report = validate_solution(instance, solution)
    if not report.ok:
        raise AssertionError(
            f"heuristic produced an invalid schedule: {report.violations[0].detail}"
        )
    return PlanResult(PlanStatus.SOLVED, solution=solution,
                      horizon=solution.horizon,
                      stats=tuple(sim.stats), repairs=tuple(sim.repairs),
                      at_goal_count=instance.n)
