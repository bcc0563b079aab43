"""Fully-occupied n x n grid puzzles solved by synchronized cycle rotations.

States are permutations of robots 1..n^2 over the grid cells (row-major cell
indexing); the goal is row-major order.  A legal move rotates one or more
vertex-disjoint simple cycles of the grid, each by one step in its chosen
direction.  Provides exact cycle enumeration with branching-factor counts, an
optimal breadth-first solver for the 3x3 board, and a constructive
(non-optimal) solver for any n >= 3 that peels the top row and right column
and recurses.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .core import MapfInstance, Solution, grid_graph


class MoveError(ValueError):
    """Ill-formed cycle move (bad cycle, or overlapping cycles)."""


class CapabilityError(RuntimeError):
    """Request outside this solver's supported problem sizes."""


class PuzzleUnsolvableError(RuntimeError):
    """No move sequence connects the state to the goal (possible only at n=2)."""


@dataclass(frozen=True)
class PuzzleState:
    """Side length n and a row-major permutation of robots 1..n^2."""

    n: int
    cells: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 2:
            raise MoveError("puzzle side length must be at least 2")
        if sorted(self.cells) != list(range(1, self.n * self.n + 1)):
            raise MoveError("cells must be a permutation of robots 1..n^2")

    @property
    def is_goal(self) -> bool:
        return all(robot == i + 1 for i, robot in enumerate(self.cells))

    def position_of(self, robot: int) -> int:
        return self.cells.index(robot)


def goal_state(n: int) -> PuzzleState:
    return PuzzleState(n, tuple(range(1, n * n + 1)))


def state_to_text(state: PuzzleState) -> str:
    return " ".join(str(x) for x in (state.n, *state.cells))


def state_from_text(text: str) -> PuzzleState:
    parts = text.split()
    if not parts:
        raise MoveError("empty puzzle state text")
    try:
        numbers = [int(p) for p in parts]
    except ValueError as exc:
        raise MoveError(f"bad puzzle state token: {exc}") from None
    n = numbers[0]
    if len(numbers) != 1 + n * n:
        raise MoveError(f"expected {n * n} cells after the side length")
    return PuzzleState(n, tuple(numbers[1:]))


def random_state(n: int, seed: int) -> PuzzleState:
    """Uniformly random permutation, deterministic per seed."""
    if n < 2:
        raise MoveError("puzzle side length must be at least 2")
    cells = list(range(1, n * n + 1))
    random.Random(seed).shuffle(cells)
    return PuzzleState(n, tuple(cells))


def _grid_adjacent(n: int, a: int, b: int) -> bool:
    ra, ca = divmod(a, n)
    rb, cb = divmod(b, n)
    return abs(ra - rb) + abs(ca - cb) == 1


@dataclass(frozen=True)
class CycleMove:
    """One or more vertex-disjoint simple grid cycles, each rotated one step.

    Direction +1 advances the robot at cycle[i] to cycle[i+1]; -1 reverses.
    """

    cycles: tuple[tuple[int, ...], ...]
    directions: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.cycles or len(self.cycles) != len(self.directions):
            raise MoveError("need one direction per cycle")
        for d in self.directions:
            if d not in (-1, 1):
                raise MoveError(f"direction must be +1 or -1, got {d}")

    def validate(self, n: int) -> None:
        seen: set[int] = set()
        for cycle in self.cycles:
            if len(cycle) < 4:
                raise MoveError(f"cycle {cycle} too short for a grid cycle")
            if len(set(cycle)) != len(cycle):
                raise MoveError(f"cycle {cycle} repeats a cell")
            for cell in cycle:
                if not (0 <= cell < n * n):
                    raise MoveError(f"cell {cell} outside the {n}x{n} grid")
            for i, cell in enumerate(cycle):
                nxt = cycle[(i + 1) % len(cycle)]
                if not _grid_adjacent(n, cell, nxt):
                    raise MoveError(f"cells {cell} and {nxt} not grid-adjacent")
            overlap = seen.intersection(cycle)
            if overlap:
                raise MoveError(f"cycles overlap on cells {sorted(overlap)}")
            seen.update(cycle)

    def permutation(self, n: int) -> tuple[int, ...]:
        """p with new_cells[i] = old_cells[p[i]]."""
        p = list(range(n * n))
        for cycle, d in zip(self.cycles, self.directions):
            k = len(cycle)
            for i in range(k):
                if d == 1:
                    p[cycle[(i + 1) % k]] = cycle[i]
                else:
                    p[cycle[i]] = cycle[(i + 1) % k]
        return tuple(p)


def apply_move(state: PuzzleState, move: CycleMove) -> PuzzleState:
    """Rotate the move's cycles one step; all other cells are unchanged."""
    move.validate(state.n)
    p = move.permutation(state.n)
    return PuzzleState(state.n, tuple(state.cells[p[i]] for i in range(len(p))))


@lru_cache(maxsize=None)
def enumerate_cycles(n: int) -> tuple[tuple[int, ...], ...]:
    """All simple cycles of the n x n grid graph, one canonical tuple each.

    Canonical form: the rotation starting at the cycle's smallest cell with
    the smaller second element (so rotations and reflections collapse).
    """
    if n < 2:
        raise MoveError("need n >= 2")
    size = n * n
    nbrs: list[list[int]] = [[] for _ in range(size)]
    for a in range(size):
        r, c = divmod(a, n)
        if c + 1 < n:
            nbrs[a].append(a + 1)
            nbrs[a + 1].append(a)
        if r + 1 < n:
            nbrs[a].append(a + n)
            nbrs[a + n].append(a)
    for lst in nbrs:
        lst.sort()

    cycles: list[tuple[int, ...]] = []
    path: list[int] = []
    on_path = [False] * size

    def extend(start: int, cur: int) -> None:
        for nxt in nbrs[cur]:
            if nxt == start and len(path) >= 3:
                if path[1] < path[-1]:
                    cycles.append(tuple(path))
            elif nxt > start and not on_path[nxt]:
                path.append(nxt)
                on_path[nxt] = True
                extend(start, nxt)
                on_path[nxt] = False
                path.pop()

    for start in range(size):
        path = [start]
        on_path = [False] * size
        on_path[start] = True
        extend(start, start)
    return tuple(sorted(cycles))


def _disjoint_sets(masks: Sequence[int]) -> Iterable[tuple[int, ...]]:
    """All non-empty pairwise-disjoint index sets, by increasing first index."""
    k = len(masks)
    chosen: list[int] = []

    def walk(start: int, used: int):
        for j in range(start, k):
            if masks[j] & used:
                continue
            chosen.append(j)
            yield tuple(chosen)
            yield from walk(j + 1, used | masks[j])
            chosen.pop()

    yield from walk(0, 0)


def _cycle_masks(cycles: Sequence[tuple[int, ...]]) -> list[int]:
    masks = []
    for cycle in cycles:
        m = 0
        for cell in cycle:
            m |= 1 << cell
        masks.append(m)
    return masks


def branching_counts(n: int) -> dict[str, int]:
    """Move-count report for the n x n puzzle.

    single_moves counts one rotated cycle (x2 directions); moves_up_to_pairs
    adds the disjoint-pair combinations (x4 direction choices); the full count
    sums 2^k over every set of k pairwise-disjoint cycles.
    """
    cycles = enumerate_cycles(n)
    masks = _cycle_masks(cycles)
    pairs = 0
    total_moves = 0
    for subset in _disjoint_sets(masks):
        total_moves += 1 << len(subset)
        if len(subset) == 2:
            pairs += 1
    return {
        "cycles": len(cycles),
        "single_moves": 2 * len(cycles),
        "disjoint_pairs": pairs,
        "moves_up_to_pairs": 2 * len(cycles) + 4 * pairs,
        "moves_all_combinations": total_moves,
    }


@lru_cache(maxsize=None)
def legal_moves(n: int) -> tuple[CycleMove, ...]:
    """Every legal one-step move: disjoint cycle subsets with all direction choices."""
    cycles = enumerate_cycles(n)
    masks = _cycle_masks(cycles)
    moves = []
    for subset in _disjoint_sets(masks):
        chosen = tuple(cycles[j] for j in subset)
        for dirbits in range(1 << len(subset)):
            dirs = tuple(1 if dirbits >> i & 1 else -1 for i in range(len(subset)))
            moves.append(CycleMove(chosen, dirs))
    return tuple(moves)


def _translate_table(n: int, move: CycleMove) -> bytes:
    """Cell map as a bytes.translate table (robot at cell x moves to table[x])."""
    sigma = list(range(256))
    for cycle, d in zip(move.cycles, move.directions):
        k = len(cycle)
        for i in range(k):
            if d == 1:
                sigma[cycle[i]] = cycle[(i + 1) % k]
            else:
                sigma[cycle[(i + 1) % k]] = cycle[i]
    return bytes(sigma)


def _positions_key(state: PuzzleState) -> bytes:
    """By-robot encoding: byte r-1 holds robot r's cell index."""
    pos = [0] * (state.n * state.n)
    for idx, robot in enumerate(state.cells):
        pos[robot - 1] = idx
    return bytes(pos)


@lru_cache(maxsize=2)
def _bfs_table(n: int) -> tuple[dict[bytes, int], tuple[CycleMove, ...], tuple[bytes, ...]]:
    """Distance-to-goal for every reachable state (moves are inversion-closed)."""
    moves = legal_moves(n)
    tables = tuple(_translate_table(n, m) for m in moves)
    goal = bytes(range(n * n))
    table = {goal: 0}
    frontier = [goal]
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for state in frontier:
            for tbl in tables:
                neighbor = state.translate(tbl)
                if neighbor not in table:
                    table[neighbor] = depth
                    nxt.append(neighbor)
        frontier = nxt
    return table, moves, tables


def bfs_depth(state: PuzzleState) -> int:
    """Optimal move count to the goal; the makespan oracle for small boards."""
    if state.n > 3:
        raise CapabilityError("breadth-first table only fits memory up to n=3")
    table, _, _ = _bfs_table(state.n)
    key = _positions_key(state)
    if key not in table:
        raise PuzzleUnsolvableError("state is not connected to the goal")
    return table[key]


def bfs_solve(state: PuzzleState) -> tuple[CycleMove, ...]:
    """A provably optimal move sequence to row-major order (n <= 3 only)."""
    if state.n > 3:
        raise CapabilityError("breadth-first table only fits memory up to n=3")
    table, moves, tables = _bfs_table(state.n)
    key = _positions_key(state)
    if key not in table:
        raise PuzzleUnsolvableError("state is not connected to the goal")
    sequence = []
    cur = key
    for depth in range(table[key], 0, -1):
        for move, tbl in zip(moves, tables):
            neighbor = cur.translate(tbl)
            if table.get(neighbor) == depth - 1:
                sequence.append(move)
                cur = neighbor
                break
        else:
            raise AssertionError("BFS table descent found no improving move")
    return tuple(sequence)


def puzzle_instance(state: PuzzleState) -> MapfInstance:
    """The equivalent planning problem on the fully-occupied n x n grid."""
    n = state.n
    graph = grid_graph(n, n)
    starts = tuple(state.cells.index(robot) for robot in range(1, n * n + 1))
    goals = tuple(range(n * n))
    return MapfInstance(graph, starts, goals)


def moves_to_solution(state: PuzzleState, moves: Sequence[CycleMove]) -> Solution:
    """Replay a move sequence as per-robot vertex paths over time."""
    n = state.n
    size = n * n
    positions = [[0] * (len(moves) + 1) for _ in range(size)]
    cells = list(state.cells)
    for idx, robot in enumerate(cells):
        positions[robot - 1][0] = idx
    for t, move in enumerate(moves, start=1):
        move.validate(n)
        p = move.permutation(n)
        cells = [cells[p[i]] for i in range(size)]
        for idx, robot in enumerate(cells):
            positions[robot - 1][t] = idx
    return Solution(tuple(tuple(track) for track in positions))


# -- constructive solver -----------------------------------------------------


class _Board:
    """Mutable working board with an accumulated move log."""

    def __init__(self, state: PuzzleState):
        self.n = state.n
        self.cells = list(state.cells)
        self.moves: list[CycleMove] = []
        self.solved: set[int] = set()

    def cell(self, r: int, c: int) -> int:
        return r * self.n + c

    def find(self, robot: int) -> int:
        return self.cells.index(robot)

    def do(self, move: CycleMove) -> None:
        move.validate(self.n)
        for cycle in move.cycles:
            for cell in cycle:
                if cell in self.solved:
                    raise AssertionError(f"move touches solved cell {cell}")
        p = move.permutation(self.n)
        self.cells = [self.cells[p[i]] for i in range(len(p))]
        self.moves.append(move)

    def rotate(self, ring: Sequence[int], shift: int) -> None:
        """Apply |shift| single-step rotations of the ring (sign = direction)."""
        length = len(ring)
        shift %= length
        if shift == 0:
            return
        if shift <= length - shift:
            direction, count = 1, shift
        else:
            direction, count = -1, length - shift
        for _ in range(count):
            self.do(CycleMove((tuple(ring),), (direction,)))

    # Unit-square conveyor: move one robot along a path, one square rotation
    # per step, never touching solved or pinned cells.
    def route_robot(self, robot: int, target: int, pinned: frozenset[int] = frozenset()) -> None:
        n = self.n
        blocked = self.solved | pinned
        if target in blocked:
            raise AssertionError(f"routing target {target} is blocked")

        def squares_of(a: int, b: int) -> list[tuple[int, int, int, int]]:
            ra, ca = divmod(a, n)
            rb, cb = divmod(b, n)
            out = []
            if ra == rb:  # horizontal edge
                c0 = min(ca, cb)
                for sr in (ra - 1, ra):
                    if 0 <= sr and sr + 1 < n:
                        out.append((self.cell(sr, c0), self.cell(sr, c0 + 1),
                                    self.cell(sr + 1, c0 + 1), self.cell(sr + 1, c0)))
            else:  # vertical edge
                r0 = min(ra, rb)
                for sc in (ca - 1, ca):
                    if 0 <= sc and sc + 1 < n:
                        out.append((self.cell(r0, sc), self.cell(r0, sc + 1),
                                    self.cell(r0 + 1, sc + 1), self.cell(r0 + 1, sc)))
            return out

        def usable_square(a: int, b: int) -> Optional[tuple[int, int, int, int]]:
            for sq in squares_of(a, b):
                if not any(cell in blocked for cell in sq):
                    return sq
            return None

        start = self.find(robot)
        if start == target:
            return
        # BFS over cells, stepping only along edges with a usable square.
        prev: dict[int, int] = {start: start}
        frontier = [start]
        while frontier and target not in prev:
            nxt = []
            for a in frontier:
                ra, ca = divmod(a, n)
                for rb, cb in ((ra - 1, ca), (ra + 1, ca), (ra, ca - 1), (ra, ca + 1)):
                    if not (0 <= rb < n and 0 <= cb < n):
                        continue
                    b = self.cell(rb, cb)
                    if b in prev or b in blocked:
                        continue
                    if usable_square(a, b) is None:
                        continue
                    prev[b] = a
                    nxt.append(b)
            frontier = nxt
        if target not in prev:
            raise AssertionError(f"no conveyor route from {start} to {target}")
        path = [target]
        while path[-1] != start:
            path.append(prev[path[-1]])
        path.reverse()
        for a, b in zip(path, path[1:]):
            sq = usable_square(a, b)
            assert sq is not None
            i = sq.index(a)
            direction = 1 if sq[(i + 1) % 4] == b else -1
            self.do(CycleMove((sq,), (direction,)))


def _expected_robot(n: int, cell: int) -> int:
    return cell + 1


def _solve_strip(board: _Board, vmap, height: int, width: int) -> None:
    """Place the virtual top row of an height x width free rectangle.

    Leading cells are routed in one at a time; the final two are staged at the
    virtual lower-left corner and rotated into place along the region's
    boundary ring.
    """
    n = board.n
    for i in range(width - 2):
        target = vmap(0, i)
        board.route_robot(_expected_robot(n, target), target)
        board.solved.add(target)

    first_target = vmap(0, width - 2)
    second_target = vmap(0, width - 1)
    robot_first = _expected_robot(n, first_target)
    robot_second = _expected_robot(n, second_target)
    if (board.cells[first_target] == robot_first
            and board.cells[second_target] == robot_second):
        board.solved.add(first_target)
        board.solved.add(second_target)
        return

    ring_virtual = [(0, width - 2), (0, width - 1)]
    ring_virtual += [(r, width - 1) for r in range(1, height)]
    ring_virtual += [(height - 1, c) for c in range(width - 2, -1, -1)]
    ring_virtual += [(r, 0) for r in range(height - 2, 0, -1)]
    ring_virtual += [(1, c) for c in range(1, width - 1)]
    ring = [vmap(r, c) for r, c in ring_virtual]
    if len(set(ring)) != len(ring):
        raise AssertionError("boundary ring is not simple")

    stage_first = vmap(height - 1, 0)
    stage_second = vmap(height - 2, 0)
    board.route_robot(robot_first, stage_first)
    board.route_robot(robot_second, stage_second, pinned=frozenset([stage_first]))
    shift = ring.index(stage_first)
    board.rotate(ring, -shift)
    if board.cells[first_target] != robot_first or board.cells[second_target] != robot_second:
        raise AssertionError("stage-and-rotate missed its targets")
    board.solved.add(first_target)
    board.solved.add(second_target)


@lru_cache(maxsize=1)
def _border_swap_macro() -> tuple[tuple[tuple[tuple[int, int], ...], int], ...]:
    """Shortest move sequence on a 2x3 block swapping its bottom-middle and
    bottom-right cells while fixing the other four; found by exhaustive search.

    Cells are (row, col) offsets into the 2x3 block; each entry is one cycle
    with its direction.
    """
    cells = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    index = {cell: i for i, cell in enumerate(cells)}
    cycles = [
        ((0, 0), (0, 1), (1, 1), (1, 0)),
        ((0, 1), (0, 2), (1, 2), (1, 1)),
        ((0, 0), (0, 1), (0, 2), (1, 2), (1, 1), (1, 0)),
    ]

    def perm_of(cycle, direction):
        p = list(range(6))
        k = len(cycle)
        for i in range(k):
            if direction == 1:
                p[index[cycle[(i + 1) % k]]] = index[cycle[i]]
            else:
                p[index[cycle[i]]] = index[cycle[(i + 1) % k]]
        return tuple(p)

    atoms = [(cycle, d, perm_of(cycle, d)) for cycle in cycles for d in (1, -1)]
    target = list(range(6))
    e, f = index[(1, 1)], index[(1, 2)]
    target[e], target[f] = target[f], target[e]
    target = tuple(target)

    def compose(p, q):  # apply p then q
        return tuple(p[q[i]] for i in range(6))

    identity = tuple(range(6))
    frontier: dict[tuple, tuple] = {identity: ()}
    for _ in range(3):
        nxt: dict[tuple, tuple] = {}
        for perm, seq in frontier.items():
            for cycle, d, ap in atoms:
                combined = compose(perm, ap)
                if combined == target:
                    return (*seq, (cycle, d))
                if combined not in nxt:
                    nxt[combined] = (*seq, (cycle, d))
        frontier = nxt
    raise AssertionError("no short border swap macro found")


def _solve_base3(board: _Board, origin_r: int, origin_c: int) -> None:
    """Finish a 3x3 block: center first, then sort the border ring with
    rotations and conjugated adjacent swaps."""
    n = board.n

    def cell(r: int, c: int) -> int:
        return board.cell(origin_r + r, origin_c + c)

    center = cell(1, 1)
    board.route_robot(_expected_robot(n, center), center)

    ring_local = [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0)]
    ring = [cell(r, c) for r, c in ring_local]
    expected = [_expected_robot(n, x) for x in ring]

    macro = _border_swap_macro()

    def macro_moves():
        for local_cycle, direction in macro:
            absolute = tuple(cell(1 + r, c) for r, c in local_cycle)
            board.do(CycleMove((absolute,), (direction,)))

    def ring_robots() -> list[int]:
        return [board.cells[x] for x in ring]

    def swap_adjacent(p: int) -> None:
        # Conjugate: rotate the pair (p, p+1) onto ring slots (4, 5) held by
        # the macro, swap, rotate back.
        shift = (4 - p) % 8
        board.rotate(ring, shift)
        macro_moves()
        board.rotate(ring, -shift)

    current = ring_robots()
    board.rotate(ring, -current.index(expected[0]))

    for k in range(1, 7):
        current = ring_robots()
        m = current.index(expected[k])
        if m < k:
            raise AssertionError("border sort disturbed a placed robot")
        while m > k:
            swap_adjacent(m - 1)
            m -= 1
    if ring_robots() != expected:
        raise AssertionError("border sort did not reach the target ordering")
    if board.cells[center] != _expected_robot(n, center):
        raise AssertionError("border sort displaced the center robot")
    board.solved.add(center)
    board.solved.update(ring)


def constructive_solve(state: PuzzleState) -> tuple[CycleMove, ...]:
    """A feasible (not optimal) move sequence to row-major order, any n >= 3.

    Peels the top row, then the right column, of the unsolved square block and
    recurses on the remaining (k-1) x (k-1) block, finishing 3x3 blocks with
    the center-then-border procedure.
    """
    if state.n < 3:
        raise CapabilityError("constructive solving needs n >= 3")
    board = _Board(state)
    n = state.n
    for step in range(n - 3):
        k = n - step
        br = step  # block occupies rows br..n-1, cols 0..k-1
        _solve_strip(board, lambda r, c, br=br: board.cell(br + r, c), k, k)
        _solve_strip(
            board,
            lambda r, c, br=br, k=k: board.cell(br + 1 + c, (k - 1) - r),
            k,
            k - 1,
        )
    _solve_base3(board, n - 3, 0)
    final = PuzzleState(n, tuple(board.cells))
    if not final.is_goal:
        raise AssertionError("constructive solver terminated off-goal")
    return tuple(board.moves)
