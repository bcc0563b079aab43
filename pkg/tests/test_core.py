import random

import pytest

from mapflow.core import (
    DiagonalSquare,
    Graph,
    GraphError,
    InstanceError,
    MapfInstance,
    MotionRule,
    Solution,
    SolutionError,
    grid_graph,
    shortest_path_length,
    validate_solution,
)
from mapflow.fixtures import tradeoff_instance

from oracles import brute_valid


def test_grid_graph_3x3_counts():
    g = grid_graph(3, 3)
    assert g.vertex_count == 9
    assert g.edge_count == 12
    assert g.is_connected


def test_grid_graph_2x1():
    g = grid_graph(2, 1)
    assert g.vertex_count == 2
    assert g.edge_count == 1


def test_grid_graph_removed_cells():
    g = grid_graph(3, 3, removed_cells={(1, 1)})
    assert g.vertex_count == 8
    assert g.edge_count == 8
    assert g.coords is not None and (1, 1) not in g.coords


def test_grid_graph_all_removed_rejected():
    with pytest.raises(GraphError):
        grid_graph(2, 2, removed_cells={(0, 0), (1, 0), (0, 1), (1, 1)})


def test_grid_graph_large_survivor_count():
    removed = {(x, y) for x, y in
               random.Random(5).sample([(x, y) for x in range(20) for y in range(15)], 60)}
    g = grid_graph(20, 15, removed)
    assert g.vertex_count == 240


def test_graph_rejects_self_loop_and_range():
    with pytest.raises(GraphError):
        Graph(2, frozenset({(1, 1)}))
    with pytest.raises(GraphError):
        Graph(2, frozenset({(0, 5)}))


def test_shortest_path_corner_to_corner():
    g = grid_graph(3, 3)
    assert shortest_path_length(g, 0, 8) == 4


def test_shortest_path_same_vertex():
    g = grid_graph(3, 3)
    assert shortest_path_length(g, 4, 4) == 0


def test_shortest_path_unreachable():
    g = Graph(3, frozenset({(0, 1)}))
    assert shortest_path_length(g, 0, 2) is None


def test_shortest_path_tradeoff_robot1():
    inst = tradeoff_instance(4)
    assert shortest_path_length(inst.graph, inst.start_of(1), inst.goal_of(1)) == 6


def test_instance_injectivity_enforced():
    g = grid_graph(2, 2)
    with pytest.raises(InstanceError):
        MapfInstance(g, (0, 0), (1, 2))
    with pytest.raises(InstanceError):
        MapfInstance(g, (0, 1), (2, 2))


def test_solution_makespan_ignores_padding():
    sol = Solution(((0, 1, 1, 1), (2, 2, 2, 2)))
    assert sol.makespan == 1
    assert sol.total_distance == 1
    padded = Solution(((0, 1, 1, 1, 1, 1), (2, 2, 2, 2, 2, 2)))
    assert padded.makespan == sol.makespan
    assert padded.total_distance == sol.total_distance


def test_validate_all_at_goal_horizon_zero():
    g = grid_graph(2, 2)
    inst = MapfInstance(g, (0, 3), (0, 3))
    report = validate_solution(inst, Solution(((0,), (3,))))
    assert report.ok
    assert report.makespan == 0
    assert report.total_distance == 0


def test_validate_headon_variants():
    g = Graph(2, frozenset({(0, 1)}))
    swap = Solution(((0, 1), (1, 0)))
    forbid = MapfInstance(g, (0, 1), (1, 0))
    report = validate_solution(forbid, swap)
    assert not report.ok
    assert {v.kind for v in report.violations} == {"head_on"}
    allow = MapfInstance(g, (0, 1), (1, 0), rule=MotionRule.ALLOW_HEAD_ON)
    assert validate_solution(allow, swap).ok


def test_validate_robot_count_mismatch_is_structural():
    g = grid_graph(2, 2)
    inst = MapfInstance(g, (0, 3), (3, 0))
    with pytest.raises(SolutionError):
        validate_solution(inst, Solution(((0, 1),)))


def test_validate_meet_and_feasibility_kinds():
    g = grid_graph(3, 1)
    inst = MapfInstance(g, (0, 2), (2, 0))
    # both robots step onto the middle vertex
    report = validate_solution(inst, Solution(((0, 1, 2), (2, 1, 0))))
    kinds = {v.kind for v in report.violations}
    assert "meet" in kinds
    # wrong start and teleport step
    report = validate_solution(inst, Solution(((1, 2, 2), (2, 0, 0))))
    kinds = {v.kind for v in report.violations}
    assert "wrong_start" in kinds
    assert "non_adjacent_step" in kinds


def test_validate_goal_not_reached():
    g = grid_graph(3, 1)
    inst = MapfInstance(g, (0,), (2,))
    report = validate_solution(inst, Solution(((0, 1, 1),)))
    assert {v.kind for v in report.violations} == {"goal_not_reached"}


def test_validate_diagonal_rules():
    # 2x2 grid, one square; diagonals 0-3 and 1-2
    g = grid_graph(2, 2)
    sq = DiagonalSquare((0, 3), (1, 2))
    inst = MapfInstance(g, (0, 1), (3, 1), rule=MotionRule.GRID_DIAGONAL,
                        diagonals=(sq,))
    ok = validate_solution(inst, Solution(((0, 3), (1, 1))))
    assert ok.ok
    # two crossings of one square in the same step
    inst2 = MapfInstance(g, (0, 1), (3, 2), rule=MotionRule.GRID_DIAGONAL,
                         diagonals=(sq,))
    report = validate_solution(inst2, Solution(((0, 3), (1, 2))))
    assert any(v.kind == "diagonal_conflict" for v in report.violations)
    # undeclared diagonal move is a non-adjacent step
    inst3 = MapfInstance(g, (0, 1), (3, 1))
    report = validate_solution(inst3, Solution(((0, 3), (1, 1))))
    assert any(v.kind == "non_adjacent_step" for v in report.violations)


def _random_walk_solution(instance, horizon, rng):
    """Build a valid solution by greedy random joint moves (may not reach goals)."""
    from oracles import _successors

    configs = [instance.starts]
    for _ in range(horizon):
        succ = _successors(instance, configs[-1])
        configs.append(rng.choice(succ))
    return configs


def test_validator_agrees_with_brute_checker_under_fuzz():
    rng = random.Random(20240817)
    g = grid_graph(3, 3)
    inst = MapfInstance(g, (0, 2, 6), (8, 0, 2))
    base = [(0, 1, 2, 5, 8, 8), (2, 1, 0, 0, 0, 0), (6, 7, 4, 1, 2, 2)]
    # make robot 2's path avoid robot 1's tail: recompute something valid
    base = [(0, 3, 4, 5, 8, 8), (2, 1, 0, 0, 0, 0), (6, 7, 4, 1, 2, 2)]
    sol = Solution(tuple(tuple(p) for p in base))
    report = validate_solution(inst, sol)
    assert report.ok == brute_valid(inst, base)
    for _ in range(300):
        robot = rng.randrange(3)
        step = rng.randrange(len(base[0]))
        mutated = [list(p) for p in base]
        mutated[robot][step] = rng.randrange(9)
        mutated_t = tuple(tuple(p) for p in mutated)
        ours = validate_solution(inst, Solution(mutated_t)).ok
        theirs = brute_valid(inst, mutated_t)
        assert ours == theirs, (mutated_t, ours, theirs)
