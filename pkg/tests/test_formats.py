import random

import pytest

from mapflow.core import MotionRule, Solution
from mapflow.fixtures import corridor_pocket_instance, gen_grid_instance, tradeoff_instance
from mapflow.formats import (
    FormatError,
    format_instance,
    format_solution,
    parse_instance,
    parse_solution,
)
from mapflow.planner import tompp


def test_instance_roundtrip_simple():
    inst = corridor_pocket_instance()
    assert parse_instance(format_instance(inst)) == inst


def test_instance_roundtrip_with_coords_and_fuzz():
    rng = random.Random(77)
    for _ in range(25):
        inst = gen_grid_instance(rng.randint(2, 6), rng.randint(2, 5),
                                 rng.choice([0.0, 0.1, 0.2]),
                                 rng.randint(1, 4), seed=rng.randint(0, 10_000))
        assert parse_instance(format_instance(inst)) == inst


def test_instance_roundtrip_diagonal_variant():
    inst = gen_grid_instance(3, 3, 0.0, 2, seed=1, rule=MotionRule.GRID_DIAGONAL)
    assert inst.diagonals
    assert parse_instance(format_instance(inst)) == inst


def test_solution_roundtrip_fuzz():
    rng = random.Random(13)
    for _ in range(25):
        n = rng.randint(1, 4)
        horizon = rng.randint(0, 6)
        paths = tuple(
            tuple(rng.randrange(10) for _ in range(horizon + 1)) for _ in range(n)
        )
        sol = Solution(paths)
        assert parse_solution(format_solution(sol)) == sol


def test_solved_output_roundtrip():
    inst = tradeoff_instance(2)
    result = tompp(inst)
    text = format_solution(result.solution)
    assert parse_solution(text) == result.solution


def test_unknown_directive_rejected_with_line_number():
    text = format_instance(corridor_pocket_instance())
    bad = text.replace("robots 2", "robbers 2")
    with pytest.raises(FormatError, match="line 11"):
        parse_instance(bad)


def test_bad_edge_and_duplicate_rejected():
    with pytest.raises(FormatError, match="line"):
        parse_instance(
            "mapf 1\nvariant forbid_headon\nvertices 2\nedges 1\ne 0 0\nrobots 1\nr 1 0 1\n"
        )
    with pytest.raises(FormatError, match="duplicate"):
        parse_instance(
            "mapf 1\nvariant forbid_headon\nvertices 2\nedges 2\ne 0 1\ne 1 0\nrobots 1\nr 1 0 1\n"
        )


def test_comments_and_blank_lines_tolerated():
    text = format_instance(corridor_pocket_instance())
    sprinkled = "# header comment\n" + text.replace("edges 6", "\nedges 6  # six edges")
    assert parse_instance(sprinkled) == corridor_pocket_instance()


def test_solution_header_mismatch():
    with pytest.raises(FormatError):
        parse_solution("solution 1 2\np 1 0 1\n")  # path too short
    with pytest.raises(FormatError, match="robot"):
        parse_solution("solution 2 1\np 1 0 0\np 1 0 0\n")


def test_unsupported_version():
    with pytest.raises(FormatError, match="version"):
        parse_instance("mapf 2\nvariant forbid_headon\nvertices 1\nedges 0\nrobots 1\nr 1 0 0\n")
