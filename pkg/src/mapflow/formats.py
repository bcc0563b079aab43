"""Line-oriented text formats for instances and solutions.

Instance files::

    mapf 1
    variant forbid_headon
    vertices 7
    coord 0 0 0            # optional, one per vertex: coord <v> <x> <y>
    edges 6
    e 0 1
    robots 2
    r 1 0 5

Under the grid_diagonal variant a ``diagonals <k>`` section with
``d v1 v3 v2 v4`` lines (the two crossing diagonals of one square) follows
the edges.  Solution files::

    solution 2 4
    p 1 0 1 2 3 4

Blank lines and ``#`` comments are ignored; anything else unknown is
rejected with its line number.  parse(format(x)) == x.
"""
from __future__ import annotations

from typing import Iterator

from .core import (
    DiagonalSquare,
    Graph,
    MapfInstance,
    MotionRule,
    Solution,
    normalize_edge,
)


class FormatError(ValueError):
    """Malformed instance or solution text; message carries the line number."""


def format_instance(instance: MapfInstance) -> str:
    lines = ["mapf 1", f"variant {instance.rule.value}",
             f"vertices {instance.graph.vertex_count}"]
    if instance.graph.coords is not None:
        for v, (x, y) in enumerate(instance.graph.coords):
            lines.append(f"coord {v} {x} {y}")
    lines.append(f"edges {instance.graph.edge_count}")
    for u, v in instance.graph.sorted_edges:
        lines.append(f"e {u} {v}")
    if instance.rule is MotionRule.GRID_DIAGONAL:
        lines.append(f"diagonals {len(instance.diagonals)}")
        for sq in instance.diagonals:
            lines.append(f"d {sq.first[0]} {sq.first[1]} {sq.second[0]} {sq.second[1]}")
    lines.append(f"robots {instance.n}")
    for robot in range(1, instance.n + 1):
        lines.append(f"r {robot} {instance.start_of(robot)} {instance.goal_of(robot)}")
    return "\n".join(lines) + "\n"


def format_solution(sol: Solution) -> str:
    lines = [f"solution {sol.n} {sol.horizon}"]
    for robot in range(1, sol.n + 1):
        lines.append("p " + " ".join(str(v) for v in (robot, *sol.path_of(robot))))
    return "\n".join(lines) + "\n"


class _Lines:
    def __init__(self, text: str):
        self.items: list[tuple[int, list[str]]] = []
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                self.items.append((number, line.split()))
        self.pos = 0

    def peek(self) -> tuple[int, list[str]]:
        if self.pos >= len(self.items):
            raise FormatError("unexpected end of file")
        return self.items[self.pos]

    def take(self, directive: str) -> tuple[int, list[str]]:
        number, parts = self.peek()
        if parts[0] != directive:
            raise FormatError(f"line {number}: expected '{directive}', got '{parts[0]}'")
        self.pos += 1
        return number, parts

    def exhausted(self) -> bool:
        return self.pos >= len(self.items)


def _ints(number: int, parts: list[str], count: int) -> list[int]:
    if len(parts) - 1 != count:
        raise FormatError(f"line {number}: expected {count} fields after '{parts[0]}'")
    try:
        return [int(p) for p in parts[1:]]
    except ValueError:
        raise FormatError(f"line {number}: non-integer field") from None


def parse_instance(text: str) -> MapfInstance:
    lines = _Lines(text)
    number, parts = lines.take("mapf")
    if parts[1:] != ["1"]:
        raise FormatError(f"line {number}: unsupported format version {parts[1:]}")
    number, parts = lines.take("variant")
    if len(parts) != 2:
        raise FormatError(f"line {number}: expected 'variant <name>'")
    try:
        rule = MotionRule.from_label(parts[1])
    except Exception:
        raise FormatError(f"line {number}: unknown variant {parts[1]!r}") from None

    number, parts = lines.take("vertices")
    (vertex_count,) = _ints(number, parts, 1)

    coords: dict[int, tuple[int, int]] = {}
    while not lines.exhausted() and lines.peek()[1][0] == "coord":
        number, parts = lines.take("coord")
        v, x, y = _ints(number, parts, 3)
        if v in coords:
            raise FormatError(f"line {number}: duplicate coord for vertex {v}")
        coords[v] = (x, y)
    if coords and sorted(coords) != list(range(vertex_count)):
        raise FormatError("coord lines must cover every vertex exactly once")

    number, parts = lines.take("edges")
    (edge_count,) = _ints(number, parts, 1)
    edges = set()
    for _ in range(edge_count):
        number, parts = lines.take("e")
        u, v = _ints(number, parts, 2)
        try:
            edge = normalize_edge(u, v)
        except Exception as exc:
            raise FormatError(f"line {number}: {exc}") from None
        if edge in edges:
            raise FormatError(f"line {number}: duplicate edge {edge}")
        edges.add(edge)

    diagonals: list[DiagonalSquare] = []
    if not lines.exhausted() and lines.peek()[1][0] == "diagonals":
        number, parts = lines.take("diagonals")
        (diag_count,) = _ints(number, parts, 1)
        for _ in range(diag_count):
            number, parts = lines.take("d")
            a, b, c, d = _ints(number, parts, 4)
            try:
                diagonals.append(DiagonalSquare(normalize_edge(a, b),
                                                normalize_edge(c, d)))
            except Exception as exc:
                raise FormatError(f"line {number}: {exc}") from None

    number, parts = lines.take("robots")
    (robot_count,) = _ints(number, parts, 1)
    starts = [0] * robot_count
    goals = [0] * robot_count
    seen = set()
    for _ in range(robot_count):
        number, parts = lines.take("r")
        robot, start, goal = _ints(number, parts, 3)
        if not (1 <= robot <= robot_count) or robot in seen:
            raise FormatError(f"line {number}: bad robot index {robot}")
        seen.add(robot)
        starts[robot - 1] = start
        goals[robot - 1] = goal
    if not lines.exhausted():
        number, parts = lines.peek()
        raise FormatError(f"line {number}: unknown directive {parts[0]!r}")

    coord_tuple = tuple(coords[v] for v in range(vertex_count)) if coords else None
    try:
        graph = Graph(vertex_count, frozenset(edges), coords=coord_tuple)
        return MapfInstance(graph, tuple(starts), tuple(goals), rule=rule,
                            diagonals=tuple(diagonals))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def parse_solution(text: str) -> Solution:
    lines = _Lines(text)
    number, parts = lines.take("solution")
    robot_count, horizon = _ints(number, parts, 2)
    if robot_count < 1 or horizon < 0:
        raise FormatError(f"line {number}: bad solution header")
    paths: list[tuple[int, ...]] = [()] * robot_count
    seen = set()
    for _ in range(robot_count):
        number, parts = lines.take("p")
        fields = _ints(number, parts, horizon + 2)
        robot = fields[0]
        if not (1 <= robot <= robot_count) or robot in seen:
            raise FormatError(f"line {number}: bad robot index {robot}")
        seen.add(robot)
        paths[robot - 1] = tuple(fields[1:])
    if not lines.exhausted():
        number, parts = lines.peek()
        raise FormatError(f"line {number}: unknown directive {parts[0]!r}")
    try:
        return Solution(tuple(paths))
    except ValueError as exc:
        raise FormatError(str(exc)) from None
