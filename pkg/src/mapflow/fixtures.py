"""Instance builders: benchmark generator and hand-built study instances."""
from __future__ import annotations

import random
from typing import Optional

from .core import (
    DiagonalSquare,
    Graph,
    GraphError,
    MapfInstance,
    MotionRule,
    grid_graph,
    normalize_edge,
)
from .puzzle import PuzzleState, puzzle_instance


class GenerationError(RuntimeError):
    """Random generation could not satisfy its constraints."""


def gen_grid_instance(width: int, height: int, obstacle_pct: float,
                      robot_count: int, seed: int,
                      rule: MotionRule = MotionRule.FORBID_HEAD_ON,
                      max_attempts: int = 200) -> MapfInstance:
    """Random grid benchmark: obstacles removed, terminals in one component.

    Removes floor(obstacle_pct * width * height) random cells, then samples
    injective starts and goals among survivors, resampling everything until
    all terminals land in a single connected component.  Deterministic per
    seed.
    """
    if not (0 <= obstacle_pct < 1):
        raise GenerationError("obstacle percentage must be in [0, 1)")
    if robot_count < 1:
        raise GenerationError("need at least one robot")
    removed_count = int(obstacle_pct * width * height)
    if width * height - removed_count < robot_count:
        raise GenerationError("not enough free cells for the requested robots")
    rng = random.Random(seed)
    all_cells = [(x, y) for y in range(height) for x in range(width)]
    for _ in range(max_attempts):
        removed = rng.sample(all_cells, removed_count)
        try:
            graph = grid_graph(width, height, removed)
        except GraphError:
            continue
        if graph.vertex_count < robot_count:
            continue
        starts = rng.sample(range(graph.vertex_count), robot_count)
        goals = rng.sample(range(graph.vertex_count), robot_count)
        comp = graph.component_ids
        terminal_comps = {comp[v] for v in starts} | {comp[v] for v in goals}
        if len(terminal_comps) != 1:
            continue
        diagonals: tuple[DiagonalSquare, ...] = ()
        if rule is MotionRule.GRID_DIAGONAL:
            diagonals = _grid_diagonals(graph, width, height)
        return MapfInstance(graph, tuple(starts), tuple(goals), rule=rule,
                            diagonals=diagonals)
    raise GenerationError(
        f"no connected terminal placement found in {max_attempts} attempts "
        f"({width}x{height}, {obstacle_pct:.0%} obstacles, {robot_count} robots)"
    )


def _grid_diagonals(graph: Graph, width: int, height: int) -> tuple[DiagonalSquare, ...]:
    """Declare both diagonals of every fully-surviving unit square."""
    assert graph.coords is not None
    index = {cell: v for v, cell in enumerate(graph.coords)}
    squares = []
    for y in range(height - 1):
        for x in range(width - 1):
            corners = [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)]
            if all(c in index for c in corners):
                tl, tr, br, bl = (index[c] for c in corners)
                squares.append(DiagonalSquare(normalize_edge(tl, br),
                                              normalize_edge(tr, bl)))
    return tuple(squares)


def tradeoff_instance(t: int) -> MapfInstance:
    """Two robots crossing between two junctions joined by a short path
    (length t) and a long arc (length 1.5t), with unit-edge spurs for the
    four terminals.  Time-optimal and distance-optimal schedules differ:
    the fast plan sends one robot around the arc, the short plan serializes
    both through the short path.
    """
    if t < 2 or t % 2 != 0:
        raise GraphError("the junction gap t must be an even integer >= 2")
    arc_len = (3 * t) // 2
    j1, j2 = 0, 1
    edges = set()
    next_id = 2

    def chain(a: int, b: int, length: int, start_id: int) -> int:
        prev = a
        vid = start_id
        for _ in range(length - 1):
            edges.add(normalize_edge(prev, vid))
            prev = vid
            vid += 1
        edges.add(normalize_edge(prev, b))
        return vid

    next_id = chain(j1, j2, t, next_id)        # short path
    next_id = chain(j1, j2, arc_len, next_id)  # long arc
    s1, s2, g1, g2 = next_id, next_id + 1, next_id + 2, next_id + 3
    edges.add(normalize_edge(s1, j1))
    edges.add(normalize_edge(g2, j1))
    edges.add(normalize_edge(s2, j2))
    edges.add(normalize_edge(g1, j2))
    graph = Graph(next_id + 4, frozenset(edges))
    return MapfInstance(graph, (s1, s2), (g1, g2))


# A tight 3x3 benchmark permutation, reconstructed from its documented
# behavior and frozen: robot 9 starts four moves from its corner goal, the
# optimum takes 4 steps, the outer-ring counterclockwise opener improves
# seven robots yet leads to a strictly longer plan, and the unique optimal
# opener is the 8-cycle through the center rotated the other way.
DEMO_9PUZZLE_CELLS = (9, 4, 1, 8, 2, 3, 6, 7, 5)
DEMO_9PUZZLE_OPENER_CYCLE = (0, 1, 2, 5, 4, 7, 6, 3)
DEMO_9PUZZLE_OPENER_DIRECTION = -1


def demo_puzzle_state() -> PuzzleState:
    return PuzzleState(3, DEMO_9PUZZLE_CELLS)


def demo_puzzle_instance() -> MapfInstance:
    return puzzle_instance(demo_puzzle_state())


def corridor_pocket_instance() -> MapfInstance:
    """Two robots meeting head-on in a corridor with one side pocket.

    Corridor 0-1-2-3-4-5 with pocket vertex 6 hanging off vertex 2; robot 1
    goes 0 -> 5, robot 2 goes 5 -> 0, so one must yield into the pocket.
    """
    edges = {(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (2, 6)}
    graph = Graph(7, frozenset(edges))
    return MapfInstance(graph, (0, 5), (5, 0))
