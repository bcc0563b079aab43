import pytest

from mapflow.core import Graph, MapfInstance, grid_graph, validate_solution
from mapflow.fixtures import corridor_pocket_instance, gen_grid_instance
from mapflow.heuristic import (
    HeuristicError,
    RepairConfig,
    decoupled_paths,
    local_repair_solve,
)
from mapflow.planner import PlanStatus, tompp


def test_decoupled_lone_robot():
    inst = MapfInstance(grid_graph(4, 1), (0,), (3,))
    assert decoupled_paths(inst) == ((0, 1, 2, 3),)


def test_decoupled_ignores_conflicts():
    g = grid_graph(3, 1)
    inst = MapfInstance(g, (0, 2), (2, 0))
    paths = decoupled_paths(inst)
    assert paths == ((0, 1, 2), (2, 1, 0))


def test_decoupled_tie_break_smallest_vertex():
    # 2x2 grid: two equal-length routes from 0 to 3; the tie-break goes via 1
    inst = MapfInstance(grid_graph(2, 2), (0,), (3,))
    assert decoupled_paths(inst) == ((0, 1, 3),)


def test_decoupled_unreachable_identifies_robot():
    g = Graph(4, frozenset({(0, 1), (2, 3)}))
    inst = MapfInstance(g, (0, 2), (1, 0))
    with pytest.raises(HeuristicError, match="robot 2"):
        decoupled_paths(inst)


def test_disjoint_bound_definition():
    inst = gen_grid_instance(6, 5, 0.1, 4, seed=3)
    paths = decoupled_paths(inst)
    total = sum(len(p) - 1 for p in paths)
    base = tompp(inst)
    assert base.solved
    assert total <= base.solution.total_distance


def test_conflict_free_instance_runs_without_repairs():
    g = grid_graph(5, 1)
    inst = MapfInstance(g, (0,), (4,))
    result = local_repair_solve(inst)
    assert result.solved
    assert result.repairs == ()
    assert result.solution.paths == ((0, 1, 2, 3, 4),)


def test_parallel_robots_no_repair():
    g = grid_graph(4, 2)
    inst = MapfInstance(g, (0, 4), (3, 7))  # two lanes, no interaction
    result = local_repair_solve(inst)
    assert result.solved
    assert result.repairs == ()
    assert result.solution.makespan == 3


def test_corridor_pocket_single_repair():
    inst = corridor_pocket_instance()
    result = local_repair_solve(inst)
    assert result.solved
    assert len(result.repairs) == 1
    assert validate_solution(inst, result.solution).ok
    exact = tompp(inst)
    assert result.solution.makespan >= exact.t_optimal


def test_heuristic_never_beats_exact_makespan():
    for seed in (2, 5, 8, 11):
        inst = gen_grid_instance(5, 4, 0.15, 4, seed=seed)
        heur = local_repair_solve(inst)
        if not heur.solved:
            continue
        assert validate_solution(inst, heur.solution).ok
        exact = tompp(inst)
        assert exact.solved
        assert heur.solution.makespan >= exact.t_optimal


def test_unreachable_instance_reports_robot():
    g = Graph(4, frozenset({(0, 1), (2, 3)}))
    inst = MapfInstance(g, (0, 2), (1, 0))
    result = local_repair_solve(inst)
    assert result.status is PlanStatus.UNSOLVABLE
    assert result.failing_robot == 2


def test_repair_cap_yields_limit():
    inst = corridor_pocket_instance()
    result = local_repair_solve(inst, RepairConfig(max_repairs=1, radius=1))
    # either it solves within one repair or stops at the cap; never an error
    assert result.status in (PlanStatus.SOLVED, PlanStatus.LIMIT)


def test_exact_fallback_proves_unsolvable():
    g = Graph(2, frozenset({(0, 1)}))
    inst = MapfInstance(g, (0, 1), (1, 0))
    result = local_repair_solve(inst)
    assert result.status is PlanStatus.UNSOLVABLE


def test_progress_measure_recorded():
    inst = corridor_pocket_instance()
    result = local_repair_solve(inst)
    for record in result.repairs:
        assert record.region_size >= 1
        assert record.local_horizon >= 1
        assert record.remaining_before >= 0


def test_repair_config_validation():
    with pytest.raises(HeuristicError):
        RepairConfig(radius=0)


def test_medium_grid_with_crowd():
    inst = gen_grid_instance(10, 10, 0.2, 12, seed=4)
    result = local_repair_solve(inst, time_limit=60.0)
    assert result.solved
    assert validate_solution(inst, result.solution).ok
    assert result.at_goal_count == 12
