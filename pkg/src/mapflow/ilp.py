"""0/1 integer programs over a time-expanded network.

One binary variable x_<robot>_<arc> per (robot, arc) pair.  Constraints: per
arc, at most one robot's unit crosses it; per (node, robot), flow in equals
flow out (loopbacks make every robot's flow a circulation, so conservation
holds uniformly at terminals too).  Loopback exclusivity and reachability
pruning are encoded as variable fixings rather than extra rows.

The makespan model maximizes the number of saturated loopbacks; the distance
model fixes all loopbacks to 1 and minimizes total arc cost.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import BinaryIO, Mapping, Optional, Sequence

from .core import bfs_distances
from .expansion import LOOPBACK, TimeExpandedNetwork

LESS_EQUAL = "<="
EQUAL = "="

MAXIMIZE = "max"
MINIMIZE = "min"


class ModelError(ValueError):
    """Structurally malformed model or assignment."""


@dataclass(frozen=True)
class Row:
    coeffs: tuple[tuple[int, int], ...]
    relation: str
    rhs: int


@dataclass(frozen=True)
class IlpModel:
    """Solver-agnostic 0/1 program with deterministic x_<robot>_<arc> naming."""

    n: int
    num_arcs: int
    rows: tuple[Row, ...]
    sense: str
    objective: tuple[tuple[int, int], ...]
    fixed: dict[int, int] = field(default_factory=dict)

    @property
    def num_vars(self) -> int:
        return self.n * self.num_arcs

    def var_id(self, robot: int, arc: int) -> int:
        if not (1 <= robot <= self.n and 0 <= arc < self.num_arcs):
            raise ModelError(f"variable (robot={robot}, arc={arc}) out of range")
        return (robot - 1) * self.num_arcs + arc

    def var_name(self, var: int) -> str:
        robot, arc = divmod(var, self.num_arcs)
        return f"x_{robot + 1}_{arc}"

    def objective_value(self, values: Sequence[int]) -> int:
        return sum(coef * values[var] for var, coef in self.objective)


def check_assignment(model: IlpModel, values: Sequence[int]) -> list[str]:
    """Violated constraints (fixings, binary bounds, rows) by direct substitution."""
    problems = []
    if len(values) != model.num_vars:
        return [f"assignment has {len(values)} values, model has {model.num_vars} variables"]
    for var, value in enumerate(values):
        if value not in (0, 1):
            problems.append(f"{model.var_name(var)} = {value} is not binary")
    for var, value in sorted(model.fixed.items()):
        if values[var] != value:
            problems.append(f"{model.var_name(var)} fixed to {value}, got {values[var]}")
    for idx, row in enumerate(model.rows):
        activity = sum(coef * values[var] for var, coef in row.coeffs)
        if row.relation == LESS_EQUAL and activity > row.rhs:
            problems.append(f"row {idx}: activity {activity} > {row.rhs}")
        elif row.relation == EQUAL and activity != row.rhs:
            problems.append(f"row {idx}: activity {activity} != {row.rhs}")
    return problems


def _conservation_rows(net: TimeExpandedNetwork, model_n: int, num_arcs: int) -> list[Row]:
    rows = []
    for node in range(net.node_count):
        coeffs_template = []
        for a in net.in_arcs[node]:
            if net.arcs[a].tail != net.arcs[a].head:
                coeffs_template.append((a, 1))
        for a in net.out_arcs[node]:
            if net.arcs[a].tail != net.arcs[a].head:
                coeffs_template.append((a, -1))
        if not coeffs_template:
            continue
        for robot in range(1, model_n + 1):
            base = (robot - 1) * num_arcs
            coeffs = tuple((base + a, c) for a, c in coeffs_template)
            rows.append(Row(coeffs, EQUAL, 0))
    return rows


def _capacity_rows(net: TimeExpandedNetwork, model_n: int, num_arcs: int) -> list[Row]:
    rows = []
    for a in range(net.arc_count):
        coeffs = tuple(((robot - 1) * num_arcs + a, 1) for robot in range(1, model_n + 1))
        rows.append(Row(coeffs, LESS_EQUAL, 1))
    return rows


def _loopback_fixings(net: TimeExpandedNetwork, num_arcs: int) -> dict[int, int]:
    fixed = {}
    for robot in range(1, net.n + 1):
        for other in range(1, net.n + 1):
            if other != robot:
                fixed[(robot - 1) * num_arcs + net.loopback_arc(other)] = 0
    return fixed


def _prune_fixings(net: TimeExpandedNetwork, num_arcs: int) -> dict[int, int]:
    """Fix to zero every (robot, arc) pair no start-to-goal route can use.

    An arc is usable by robot i only if some entry vertex is reachable from
    the robot's start within the arc's tail step and some exit vertex can
    still reach the goal in the steps remaining after the head step.
    Distances are single-robot move counts (diagonals included when declared).
    """
    inst = net.instance
    T = net.horizon
    adjacency = inst.motion_adjacency
    fixed = {}
    for robot in range(1, inst.n + 1):
        from_start = bfs_distances(adjacency, inst.start_of(robot))
        to_goal = bfs_distances(adjacency, inst.goal_of(robot))
        base = (robot - 1) * num_arcs
        for arc in net.arcs:
            if arc.kind == LOOPBACK:
                continue
            enter_ok = any(
                from_start[w] is not None and from_start[w] <= arc.t_tail
                for w in arc.enter
            )
            exit_ok = any(
                to_goal[w] is not None and to_goal[w] <= T - arc.t_head
                for w in arc.exit_to
            )
            if not (enter_ok and exit_ok):
                fixed[base + arc.index] = 0
    return fixed


def _diagonal_exit_rows(net: TimeExpandedNetwork, model_n: int,
                        num_arcs: int) -> list[Row]:
    """Per-robot coupling for diagonal-crossing gadgets.

    The four-corner gadget structurally admits entering at one corner and
    leaving at an edge-adjacent one, which would bypass that edge's head-on
    protection.  Entering at a corner therefore implies exiting at the
    corner's diagonal partner: x_in(a) <= x_out(partner(a)).
    """
    partners: dict[int, dict[int, int]] = {}
    for idx, square in enumerate(net.instance.diagonals):
        partner = {square.first[0]: square.first[1], square.first[1]: square.first[0],
                   square.second[0]: square.second[1], square.second[1]: square.second[0]}
        partners[idx] = partner
    ins: dict[tuple[int, int, int], int] = {}
    outs: dict[tuple[int, int, int], int] = {}
    for arc in net.arcs:
        if arc.kind == "din":
            _, idx, t, w = arc.tag
            ins[(idx, t, w)] = arc.index
        elif arc.kind == "dout":
            _, idx, t, w = arc.tag
            outs[(idx, t, w)] = arc.index
    rows = []
    for (idx, t, w), in_arc in sorted(ins.items()):
        out_arc = outs[(idx, t, partners[idx][w])]
        for robot in range(1, model_n + 1):
            base = (robot - 1) * num_arcs
            rows.append(Row(((base + in_arc, 1), (base + out_arc, -1)),
                            LESS_EQUAL, 0))
    return rows


def _build_common(net: TimeExpandedNetwork, prune: bool) -> tuple[list[Row], dict[int, int]]:
    num_arcs = net.arc_count
    rows = _capacity_rows(net, net.n, num_arcs)
    rows.extend(_conservation_rows(net, net.n, num_arcs))
    rows.extend(_diagonal_exit_rows(net, net.n, num_arcs))
    fixed = _loopback_fixings(net, num_arcs)
    if prune:
        fixed.update(_prune_fixings(net, num_arcs))
    return rows, fixed


def build_tompp_model(net: TimeExpandedNetwork, prune: bool = True) -> IlpModel:
    """Maximize the number of robots whose circulation closes (reaches its goal)."""
    rows, fixed = _build_common(net, prune)
    num_arcs = net.arc_count
    objective = tuple(
        ((robot - 1) * num_arcs + net.loopback_arc(robot), 1)
        for robot in range(1, net.n + 1)
    )
    return IlpModel(net.n, num_arcs, tuple(rows), MAXIMIZE, objective, fixed)


def build_dompp_model(net: TimeExpandedNetwork, prune: bool = True) -> IlpModel:
    """Force every robot to its goal and minimize the total arc cost incurred."""
    rows, fixed = _build_common(net, prune)
    num_arcs = net.arc_count
    for robot in range(1, net.n + 1):
        fixed[(robot - 1) * num_arcs + net.loopback_arc(robot)] = 1
    objective = []
    for robot in range(1, net.n + 1):
        base = (robot - 1) * num_arcs
        for arc in net.arcs:
            if arc.kind != LOOPBACK and arc.cost != 0:
                objective.append((base + arc.index, arc.cost))
    return IlpModel(net.n, num_arcs, tuple(rows), MINIMIZE, tuple(objective), fixed)


def _format_terms(coeffs: Sequence[tuple[int, int]], name_of) -> str:
    parts: list[str] = []
    for var, coef in coeffs:
        if coef < 0:
            op, mag = "-", -coef
        else:
            op, mag = "+", coef
        term = name_of(var) if mag == 1 else f"{mag} {name_of(var)}"
        if not parts:
            parts.append(term if op == "+" else f"- {term}")
        else:
            parts.append(f"{op} {term}")
    return " ".join(parts)


def _wrap(line: str, width: int = 200) -> list[str]:
    if len(line) <= width:
        return [line]
    out = []
    cur = line
    while len(cur) > width:
        cut = cur.rfind(" ", 0, width)
        if cut <= 0:
            break
        out.append(cur[:cut])
        cur = " " + cur[cut:]
    out.append(cur)
    return out


def export_lp(model: IlpModel, sink: BinaryIO) -> None:
    """Write the model in LP text format; byte-identical for identical models."""
    lines = []
    lines.append("\\ mapflow 0/1 model")
    lines.append("Maximize" if model.sense == MAXIMIZE else "Minimize")
    lines.extend(_wrap(" obj: " + _format_terms(model.objective, model.var_name)))
    lines.append("Subject To")
    for idx, row in enumerate(model.rows):
        rel = "<=" if row.relation == LESS_EQUAL else "="
        body = _format_terms(row.coeffs, model.var_name)
        lines.extend(_wrap(f" c{idx}: {body} {rel} {row.rhs}"))
    if model.fixed:
        lines.append("Bounds")
        for var, value in sorted(model.fixed.items()):
            lines.append(f" {model.var_name(var)} = {value}")
    lines.append("Binary")
    for var in range(model.num_vars):
        lines.append(f" {model.var_name(var)}")
    lines.append("End")
    sink.write(("\n".join(lines) + "\n").encode("ascii"))
