"""Graph and instance data model, shortest-path utilities, and the solution validator.

Vertices are dense integers 0..V-1; robots are indexed 1..n.  All value types
are immutable after construction and safe to share across threads.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, Sequence

Edge = tuple[int, int]


class GraphError(ValueError):
    """Malformed graph construction input."""


class InstanceError(ValueError):
    """Malformed planning instance."""


class SolutionError(ValueError):
    """Structurally unusable solution (e.g. robot count mismatch)."""


def normalize_edge(u: int, v: int) -> Edge:
    if u == v:
        raise GraphError(f"self-loop edge ({u},{v}) not allowed")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph: no self-loops, no multi-edges.

    ``coords`` optionally labels each vertex with a grid coordinate ``(x, y)``;
    the planner never reads it, but generators and file formats carry it.
    """

    vertex_count: int
    edges: frozenset[Edge]
    coords: Optional[tuple[tuple[int, int], ...]] = None

    def __post_init__(self) -> None:
        if self.vertex_count < 0:
            raise GraphError("vertex_count must be non-negative")
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop edge ({u},{v})")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise GraphError(f"edge ({u},{v}) out of range")
            if u > v:
                raise GraphError(f"edge ({u},{v}) not normalized (expected u < v)")
        if self.coords is not None and len(self.coords) != self.vertex_count:
            raise GraphError("coords length must equal vertex_count")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def sorted_edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        return (min(u, v), max(u, v)) in self.edges

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    @cached_property
    def component_ids(self) -> tuple[int, ...]:
        """Connected-component id per vertex (ids are 0-based, discovery order)."""
        comp = [-1] * self.vertex_count
        next_id = 0
        for s in range(self.vertex_count):
            if comp[s] >= 0:
                continue
            comp[s] = next_id
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w in self.adjacency[u]:
                    if comp[w] < 0:
                        comp[w] = next_id
                        queue.append(w)
            next_id += 1
        return tuple(comp)

    @property
    def is_connected(self) -> bool:
        if self.vertex_count <= 1:
            return True
        return all(c == 0 for c in self.component_ids)


def grid_graph(width: int, height: int, removed_cells: Iterable[tuple[int, int]] = ()) -> Graph:
    """4-connected grid over the surviving cells, with (x, y) coordinate labels.

    Cells are addressed as (x, y) with 0 <= x < width, 0 <= y < height, and the
    surviving cells are numbered densely in row-major order.
    """
    if width < 1 or height < 1:
        raise GraphError("grid dimensions must be at least 1x1")
    removed = set(removed_cells)
    for (x, y) in removed:
        if not (0 <= x < width and 0 <= y < height):
            raise GraphError(f"removed cell {(x, y)} out of bounds")
    cells = [(x, y) for y in range(height) for x in range(width) if (x, y) not in removed]
    if not cells:
        raise GraphError("all grid cells removed")
    index = {cell: i for i, cell in enumerate(cells)}
    edges = set()
    for (x, y) in cells:
        for nx, ny in ((x + 1, y), (x, y + 1)):
            if (nx, ny) in index:
                edges.add(normalize_edge(index[(x, y)], index[(nx, ny)]))
    return Graph(len(cells), frozenset(edges), coords=tuple(cells))


def bfs_distances(adjacency: Sequence[Sequence[int]], source: int) -> list[Optional[int]]:
    """BFS edge-count distances from ``source``; None for unreachable vertices."""
    dist: list[Optional[int]] = [None] * len(adjacency)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u]
        assert du is not None
        for w in adjacency[u]:
            if dist[w] is None:
                dist[w] = du + 1
                queue.append(w)
    return dist


def shortest_path_length(graph: Graph, u: int, v: int) -> Optional[int]:
    """BFS distance in edge count; 0 iff u == v; None if u and v are disconnected."""
    if not (0 <= u < graph.vertex_count and 0 <= v < graph.vertex_count):
        raise GraphError(f"vertex out of range: {u} or {v}")
    if u == v:
        return 0
    return bfs_distances(graph.adjacency, u)[v]


class MotionRule(Enum):
    """Collision semantics for simultaneous motion."""

    FORBID_HEAD_ON = "forbid_headon"
    ALLOW_HEAD_ON = "allow_headon"
    GRID_DIAGONAL = "grid_diagonal"

    @classmethod
    def from_label(cls, label: str) -> "MotionRule":
        for rule in cls:
            if rule.value == label:
                return rule
        raise InstanceError(f"unknown motion rule {label!r}")


@dataclass(frozen=True)
class DiagonalSquare:
    """Two crossing diagonals of one grid square: at most one may be used per step."""

    first: Edge
    second: Edge

    def __post_init__(self) -> None:
        a, b = self.first
        c, d = self.second
        if a >= b or c >= d:
            raise InstanceError("diagonal pairs must be normalized (u < v)")
        if len({a, b, c, d}) != 4:
            raise InstanceError("diagonal square must have four distinct corners")

    @property
    def corners(self) -> tuple[int, int, int, int]:
        return (*self.first, *self.second)


@dataclass(frozen=True)
class MapfInstance:
    """A multi-robot path planning problem: move robot i from starts[i-1] to goals[i-1].

    Start locations are pairwise distinct, as are goal locations (the maps are
    injective); a robot may of course start at its own goal.
    """

    graph: Graph
    starts: tuple[int, ...]
    goals: tuple[int, ...]
    rule: MotionRule = MotionRule.FORBID_HEAD_ON
    diagonals: tuple[DiagonalSquare, ...] = ()

    def __post_init__(self) -> None:
        if len(self.starts) != len(self.goals):
            raise InstanceError("starts and goals must have equal length")
        if not self.starts:
            raise InstanceError("instance needs at least one robot")
        for v in (*self.starts, *self.goals):
            if not (0 <= v < self.graph.vertex_count):
                raise InstanceError(f"terminal vertex {v} out of range")
        if len(set(self.starts)) != len(self.starts):
            raise InstanceError("start map must be injective")
        if len(set(self.goals)) != len(self.goals):
            raise InstanceError("goal map must be injective")
        if self.diagonals and self.rule is not MotionRule.GRID_DIAGONAL:
            raise InstanceError("diagonal squares require the grid_diagonal rule")
        for sq in self.diagonals:
            for v in sq.corners:
                if not (0 <= v < self.graph.vertex_count):
                    raise InstanceError(f"diagonal corner {v} out of range")

    @property
    def n(self) -> int:
        return len(self.starts)

    def start_of(self, robot: int) -> int:
        return self.starts[robot - 1]

    def goal_of(self, robot: int) -> int:
        return self.goals[robot - 1]

    @cached_property
    def diagonal_edges(self) -> frozenset[Edge]:
        pairs: set[Edge] = set()
        for sq in self.diagonals:
            pairs.add(sq.first)
            pairs.add(sq.second)
        return frozenset(pairs)

    @cached_property
    def motion_adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Graph adjacency augmented with declared diagonals (single-robot moves)."""
        if not self.diagonals:
            return self.graph.adjacency
        nbrs = [set(a) for a in self.graph.adjacency]
        for u, v in self.diagonal_edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    def motion_distance(self, u: int, v: int) -> Optional[int]:
        """Shortest single-robot move count from u to v under this motion rule."""
        if u == v:
            return 0
        return bfs_distances(self.motion_adjacency, u)[v]


def _arrival_step(path: Sequence[int]) -> int:
    """Smallest k such that the path is constant from k to the end."""
    k = len(path) - 1
    while k > 0 and path[k - 1] == path[-1]:
        k -= 1
    return k


@dataclass(frozen=True)
class Solution:
    """Per-robot vertex sequences over time steps 0..T (robot i is paths[i-1]).

    Sequences are stored at full length T+1, padded at the goal; the arrival
    step of each robot is derived, so makespan does not depend on padding.
    """

    paths: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.paths:
            raise SolutionError("solution needs at least one robot path")
        lengths = {len(p) for p in self.paths}
        if len(lengths) != 1:
            raise SolutionError("all robot paths must share one horizon")
        if 0 in lengths:
            raise SolutionError("paths must contain at least the step-0 vertex")

    @property
    def n(self) -> int:
        return len(self.paths)

    @property
    def horizon(self) -> int:
        return len(self.paths[0]) - 1

    def path_of(self, robot: int) -> tuple[int, ...]:
        return self.paths[robot - 1]

    @cached_property
    def arrival_steps(self) -> tuple[int, ...]:
        return tuple(_arrival_step(p) for p in self.paths)

    @property
    def makespan(self) -> int:
        return max(self.arrival_steps)

    @property
    def total_distance(self) -> int:
        return sum(
            1 for p in self.paths for k in range(len(p) - 1) if p[k] != p[k + 1]
        )


# Violation kinds reported by validate_solution.
WRONG_START = "wrong_start"
GOAL_NOT_REACHED = "goal_not_reached"
NON_ADJACENT_STEP = "non_adjacent_step"
MEET = "meet"
HEAD_ON = "head_on"
DIAGONAL_CONFLICT = "diagonal_conflict"


@dataclass(frozen=True)
class Violation:
    kind: str
    robots: tuple[int, ...]
    time: Optional[int]
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]
    makespan: int
    total_distance: int

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_solution(instance: MapfInstance, sol: Solution) -> ValidationReport:
    """Check a solution against the instance's feasibility and collision rules.

    Feasibility per robot: starts at its start vertex, rests at its goal from
    some step onward, and every step either waits or crosses a graph edge (or a
    declared diagonal under the grid_diagonal rule).  Collisions: two robots on
    one vertex at the same step (meet); two robots exchanging the endpoints of
    an edge in one step (head-on, skipped under allow_headon); two uses of one
    square's crossing diagonals in the same step (grid_diagonal only).
    """
    if sol.n != instance.n:
        raise SolutionError(
            f"solution covers {sol.n} robots, instance has {instance.n}"
        )
    graph = instance.graph
    T = sol.horizon
    violations: list[Violation] = []

    diag_of: dict[Edge, list[int]] = {}
    for idx, sq in enumerate(instance.diagonals):
        diag_of.setdefault(sq.first, []).append(idx)
        diag_of.setdefault(sq.second, []).append(idx)

    for robot in range(1, instance.n + 1):
        path = sol.path_of(robot)
        if path[0] != instance.start_of(robot):
            violations.append(
                Violation(WRONG_START, (robot,), 0,
                          f"robot {robot} starts at {path[0]}, expected {instance.start_of(robot)}")
            )
        if path[T] != instance.goal_of(robot):
            violations.append(
                Violation(GOAL_NOT_REACHED, (robot,), T,
                          f"robot {robot} ends at {path[T]}, goal is {instance.goal_of(robot)}")
            )
        for k in range(T):
            a, b = path[k], path[k + 1]
            if a == b or graph.has_edge(a, b):
                continue
            if instance.rule is MotionRule.GRID_DIAGONAL and normalize_edge(a, b) in diag_of:
                continue
            violations.append(
                Violation(NON_ADJACENT_STEP, (robot,), k,
                          f"robot {robot} steps {a}->{b} at t={k} along no edge")
            )

    for k in range(T + 1):
        occupied: dict[int, list[int]] = {}
        for robot in range(1, instance.n + 1):
            occupied.setdefault(sol.path_of(robot)[k], []).append(robot)
        for v, robots in sorted(occupied.items()):
            if len(robots) > 1:
                violations.append(
                    Violation(MEET, tuple(robots), k,
                              f"robots {robots} share vertex {v} at t={k}")
                )

    if instance.rule is not MotionRule.ALLOW_HEAD_ON:
        for k in range(T):
            movers: dict[tuple[int, int], int] = {}
            for robot in range(1, instance.n + 1):
                a, b = sol.path_of(robot)[k], sol.path_of(robot)[k + 1]
                if a != b and graph.has_edge(a, b):
                    movers[(a, b)] = robot
            for (a, b), robot in sorted(movers.items()):
                other = movers.get((b, a))
                if other is not None and robot < other:
                    violations.append(
                        Violation(HEAD_ON, (robot, other), k,
                                  f"robots {robot} and {other} swap edge ({a},{b}) at t={k}")
                    )

    if instance.rule is MotionRule.GRID_DIAGONAL:
        for k in range(T):
            per_square: dict[int, list[int]] = {}
            for robot in range(1, instance.n + 1):
                a, b = sol.path_of(robot)[k], sol.path_of(robot)[k + 1]
                if a == b or graph.has_edge(a, b):
                    continue
                key = normalize_edge(a, b)
                for idx in diag_of.get(key, ()):
                    per_square.setdefault(idx, []).append(robot)
            for idx, robots in sorted(per_square.items()):
                if len(robots) > 1:
                    violations.append(
                        Violation(DIAGONAL_CONFLICT, tuple(sorted(robots)), k,
                                  f"square {idx} crossed {len(robots)} times at t={k}")
                    )

    ordered = tuple(sorted(violations, key=lambda v: (v.time if v.time is not None else -1,
                                                      v.kind, v.robots)))
    return ValidationReport(ordered, sol.makespan, sol.total_distance)
