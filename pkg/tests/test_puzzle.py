import random
from collections import Counter

import pytest

import networkx as nx

from mapflow.core import validate_solution
from mapflow.fixtures import (
    DEMO_9PUZZLE_OPENER_CYCLE,
    DEMO_9PUZZLE_OPENER_DIRECTION,
    demo_puzzle_instance,
    demo_puzzle_state,
)
from mapflow.puzzle import (
    CapabilityError,
    CycleMove,
    MoveError,
    PuzzleState,
    PuzzleUnsolvableError,
    apply_move,
    bfs_depth,
    bfs_solve,
    branching_counts,
    constructive_solve,
    enumerate_cycles,
    goal_state,
    legal_moves,
    moves_to_solution,
    puzzle_instance,
    random_state,
    state_from_text,
    state_to_text,
)

OUTER_RING = (0, 1, 2, 5, 8, 7, 6, 3)


def networkx_cycle_count(n):
    """Independent enumeration of the grid graph's simple cycles."""
    return sum(1 for _ in nx.simple_cycles(nx.grid_2d_graph(n, n)))


def test_cycle_counts_against_independent_oracle():
    assert len(enumerate_cycles(2)) == 1 == networkx_cycle_count(2)
    assert len(enumerate_cycles(3)) == 13 == networkx_cycle_count(3)
    assert len(enumerate_cycles(4)) == networkx_cycle_count(4)


def test_branching_factor_3x3():
    counts = branching_counts(3)
    assert counts["cycles"] == 13
    assert counts["single_moves"] == 26
    assert counts["disjoint_pairs"] == 0
    assert counts["moves_all_combinations"] == 26
    assert len(legal_moves(3)) == 26


def test_disjoint_pairs_against_independent_oracle():
    cycles = enumerate_cycles(4)
    sets = [frozenset(c) for c in cycles]
    expected = sum(1 for i in range(len(sets)) for j in range(i + 1, len(sets))
                   if not (sets[i] & sets[j]))
    assert branching_counts(4)["disjoint_pairs"] == expected


def test_cycles_are_canonical_simple_grid_cycles():
    for n in (2, 3, 4):
        for cycle in enumerate_cycles(n):
            assert cycle[0] == min(cycle)
            assert cycle[1] < cycle[-1]
            assert len(set(cycle)) == len(cycle) >= 4
            CycleMove((cycle,), (1,)).validate(n)


def test_apply_move_inverse():
    state = goal_state(3)
    clockwise = CycleMove((OUTER_RING,), (1,))
    counter = CycleMove((OUTER_RING,), (-1,))
    assert apply_move(apply_move(state, clockwise), counter) == state


def test_apply_move_rejects_overlap_and_bad_cycles():
    with pytest.raises(MoveError, match="overlap"):
        apply_move(goal_state(3), CycleMove(((0, 1, 4, 3), (1, 2, 5, 4)), (1, 1)))
    with pytest.raises(MoveError):
        apply_move(goal_state(3), CycleMove(((0, 1, 5, 3),), (1,)))  # not adjacent
    with pytest.raises(MoveError):
        CycleMove(((0, 1, 4, 3),), (2,))


def test_any_move_is_a_valid_one_step_schedule():
    # collision rules only: the schedule's endpoints are where the move lands
    from mapflow.core import MapfInstance
    rng = random.Random(3)
    for n in (3, 4):
        state = random_state(n, 17)
        grid = puzzle_instance(state).graph
        for move in rng.sample(list(legal_moves(n)), 10):
            sol = moves_to_solution(state, [move])
            inst = MapfInstance(grid,
                                tuple(p[0] for p in sol.paths),
                                tuple(p[-1] for p in sol.paths))
            assert validate_solution(inst, sol).ok


def test_bfs_trivial_and_demo_depths():
    assert bfs_solve(goal_state(3)) == ()
    assert bfs_depth(demo_puzzle_state()) == 4
    assert len(bfs_solve(demo_puzzle_state())) == 4


def test_demo_state_documented_structure():
    state = demo_puzzle_state()
    # robot 9 needs four steps from the far corner
    assert state.cells[0] == 9
    # the counterclockwise outer rotation leads to a strictly longer plan
    ccw = CycleMove((OUTER_RING,), (-1,))
    assert bfs_depth(apply_move(state, ccw)) == 5
    # the frozen opener is optimal...
    opener = CycleMove((DEMO_9PUZZLE_OPENER_CYCLE,), (DEMO_9PUZZLE_OPENER_DIRECTION,))
    assert bfs_depth(apply_move(state, opener)) == 3
    optimal_openers = [m for m in legal_moves(3)
                       if bfs_depth(apply_move(state, m)) == 3]
    assert opener in optimal_openers
    # ...and uniquely matches the documented pattern: the full ring through
    # the center turns, leaving only robot 5 in place
    eight_through_center = [m for m in optimal_openers
                            if len(m.cycles) == 1 and len(m.cycles[0]) == 8
                            and 4 in m.cycles[0]]
    assert eight_through_center == [opener]


def test_bfs_replay_reaches_goal():
    for seed in (1, 2, 3):
        state = random_state(3, seed)
        cur = state
        for move in bfs_solve(state):
            cur = apply_move(cur, move)
        assert cur.is_goal


def test_bfs_rejects_large_boards():
    with pytest.raises(CapabilityError):
        bfs_solve(random_state(4, 1))


def test_bfs_detects_unsolvable_2x2():
    # the lone 4-cycle only reaches the 4 rotations of the goal
    state = PuzzleState(2, (2, 1, 3, 4))
    with pytest.raises(PuzzleUnsolvableError):
        bfs_solve(state)


def test_bfs_solution_converts_to_valid_schedule():
    state = random_state(3, 9)
    moves = bfs_solve(state)
    sol = moves_to_solution(state, moves)
    assert validate_solution(puzzle_instance(state), sol).ok
    assert sol.makespan == len(moves)


def test_constructive_transposed_pair():
    cells = list(range(1, 10))
    cells[7 - 1], cells[9 - 1] = cells[9 - 1], cells[7 - 1]  # swap robots 7 and 9
    state = PuzzleState(3, tuple(cells))
    moves = constructive_solve(state)
    cur = state
    for move in moves:
        cur = apply_move(cur, move)
    assert cur.is_goal


def test_constructive_goal_state_is_trivial_or_short():
    moves = constructive_solve(goal_state(4))
    assert moves == ()


def test_constructive_random_states():
    lengths = {}
    for n in (3, 4, 5):
        worst = 0
        for seed in range(20):
            state = random_state(n, seed)
            moves = constructive_solve(state)
            cur = state
            for move in moves:
                cur = apply_move(cur, move)  # validates every move
            assert cur.is_goal
            worst = max(worst, len(moves))
        lengths[n] = worst
    # tracked growth: comfortably within a cubic envelope
    for n, worst in lengths.items():
        assert worst <= 40 * n ** 3


def test_constructive_rejects_2x2():
    with pytest.raises(CapabilityError):
        constructive_solve(goal_state(2))


def test_random_state_deterministic_and_uniform():
    assert random_state(3, 123) == random_state(3, 123)
    counts = Counter()
    samples = 10_000
    for seed in range(samples):
        state = random_state(2, seed)
        for cell, robot in enumerate(state.cells):
            counts[(cell, robot)] += 1
    expected = samples / 4
    sigma = (samples * 0.25 * 0.75) ** 0.5
    for key, count in counts.items():
        assert abs(count - expected) <= 3 * sigma, (key, count)


def test_random_9puzzles_all_solvable():
    for seed in range(1, 101):
        bfs_depth(random_state(3, seed))  # raises if disconnected


def test_serialization_roundtrip():
    for n, seed in ((2, 5), (3, 6), (5, 7)):
        state = random_state(n, seed)
        assert state_from_text(state_to_text(state)) == state
    with pytest.raises(MoveError):
        state_from_text("3 1 2 3")
    with pytest.raises(MoveError):
        state_from_text("2 1 2 3 3")


def test_puzzle_instance_layout():
    state = demo_puzzle_state()
    inst = puzzle_instance(state)
    assert inst.graph.vertex_count == 9
    assert inst.goals == tuple(range(9))
    assert inst.starts[9 - 1] == 0  # robot 9 sits top-left
