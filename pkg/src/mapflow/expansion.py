"""Time-expanded network construction and the solution <-> flow conversions.

For a horizon T, every graph vertex v gets 2T+1 copies v(0)=v(0)', v(1),
v(1)', ..., v(T)': the t=0 copy is merged.  A unit-capacity throughput arc
v(t) -> v(t)' enforces that at most one robot occupies v at step t; a stay arc
v(t)' -> v(t+1) lets a robot wait.  Each undirected edge and step gets a
merge-split gadget (two in-arcs, one middle arc carrying the traverse cost,
two out-arcs) so that opposite-direction traversals in the same step are
mutually exclusive.  Under the allow_headon rule the gadget degenerates to two
independent direction arcs.  Under the grid_diagonal rule each declared square
additionally gets a four-corner merge-split gadget whose unit middle arc
admits a single diagonal crossing per step.

One loopback arc per robot, from its goal copy at level T back to its start
copy at level 0, closes every robot's flow into a circulation; the loopbacks
are always the last n arcs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import (
    MapfInstance,
    MotionRule,
    Solution,
    normalize_edge,
    validate_solution,
)

# Arc kinds.
STAY = "stay"
THRU = "thru"
GADGET_IN = "gin"
GADGET_MIDDLE = "gmid"
GADGET_OUT = "gout"
DIAG_IN = "din"
DIAG_MIDDLE = "dmid"
DIAG_OUT = "dout"
LOOPBACK = "loop"

DIAGONAL_KINDS = (DIAG_IN, DIAG_MIDDLE, DIAG_OUT)


class ExpansionError(ValueError):
    """Invalid network construction input."""


class FlowError(ValueError):
    """A flow that violates capacity, conservation, or value requirements."""


@dataclass(frozen=True)
class CostProfile:
    """Arc costs: gadget middles carry traverse_cost, stay arcs stay_cost.

    The default (1, 0) makes a minimum-cost flow minimize the total number of
    edges traveled; stay_cost=1 additionally charges each wait step.
    """

    traverse_cost: int = 1
    stay_cost: int = 0

    def __post_init__(self) -> None:
        if self.traverse_cost < 0 or self.stay_cost < 0:
            raise ExpansionError("arc costs must be non-negative")


@dataclass(frozen=True)
class Arc:
    """Directed unit-capacity arc of the time-expanded network.

    ``enter``/``exit_to`` list the graph vertices a robot may occupy when its
    route uses this arc at steps ``t_tail``/``t_head`` (empty for loopbacks);
    the ILP reachability pruning reads them.
    """

    index: int
    kind: str
    tail: int
    head: int
    cost: int
    tag: tuple
    enter: tuple[int, ...]
    exit_to: tuple[int, ...]
    t_tail: int
    t_head: int

    @property
    def capacity(self) -> int:
        return 1


class TimeExpandedNetwork:
    """Immutable directed gadget network over vertex copies at steps 0..T."""

    def __init__(self, instance: MapfInstance, horizon: int,
                 cost_profile: CostProfile = CostProfile()):
        if horizon < 0:
            raise ExpansionError("horizon must be non-negative")
        self.instance = instance
        self.horizon = horizon
        self.cost_profile = cost_profile
        self.node_tags: list[tuple] = []
        self._node_ids: dict[tuple, int] = {}
        self.arcs: list[Arc] = []
        self._arc_ids: dict[tuple, int] = {}
        self._routes: dict[tuple[int, int, int], tuple[int, ...]] = {}
        self._build()
        self.sources = tuple(
            self.vertex_node(instance.start_of(i), 0) for i in range(1, instance.n + 1)
        )
        self.sinks = tuple(
            self.vertex_node(instance.goal_of(i), horizon, primed=True)
            for i in range(1, instance.n + 1)
        )
        self.in_arcs: list[list[int]] = [[] for _ in self.node_tags]
        self.out_arcs: list[list[int]] = [[] for _ in self.node_tags]
        for arc in self.arcs:
            self.out_arcs[arc.tail].append(arc.index)
            self.in_arcs[arc.head].append(arc.index)

    # -- construction -------------------------------------------------------

    def _add_node(self, tag: tuple) -> int:
        node_id = len(self.node_tags)
        self.node_tags.append(tag)
        self._node_ids[tag] = node_id
        return node_id

    def _add_arc(self, kind: str, tail: int, head: int, cost: int, tag: tuple,
                 enter: tuple[int, ...], exit_to: tuple[int, ...],
                 t_tail: int, t_head: int) -> int:
        index = len(self.arcs)
        self.arcs.append(Arc(index, kind, tail, head, cost, tag, enter, exit_to,
                             t_tail, t_head))
        self._arc_ids[tag] = index
        return index

    def _build(self) -> None:
        inst = self.instance
        graph = inst.graph
        T = self.horizon
        rule = inst.rule
        traverse = self.cost_profile.traverse_cost
        stay_cost = self.cost_profile.stay_cost

        for t in range(T + 1):
            for v in range(graph.vertex_count):
                self._add_node(("v", v, t, 0))
            if t >= 1:
                for v in range(graph.vertex_count):
                    self._add_node(("v", v, t, 1))
            if t < T:
                if rule is not MotionRule.ALLOW_HEAD_ON:
                    for (u, v) in graph.sorted_edges:
                        self._add_node(("g", "e", u, v, t, "m"))
                        self._add_node(("g", "e", u, v, t, "s"))
                if rule is MotionRule.GRID_DIAGONAL:
                    for idx in range(len(inst.diagonals)):
                        self._add_node(("g", "d", idx, t, "m"))
                        self._add_node(("g", "d", idx, t, "s"))

        for t in range(T):
            for v in range(graph.vertex_count):
                self._add_arc(
                    STAY, self.vertex_node(v, t, primed=True),
                    self.vertex_node(v, t + 1), stay_cost,
                    ("stay", v, t), (v,), (v,), t, t + 1,
                )
            for (u, v) in graph.sorted_edges:
                if rule is MotionRule.ALLOW_HEAD_ON:
                    fwd = self._add_arc(
                        GADGET_MIDDLE, self.vertex_node(u, t, primed=True),
                        self.vertex_node(v, t + 1), traverse,
                        ("gmid", u, v, t, u), (u,), (v,), t, t + 1,
                    )
                    rev = self._add_arc(
                        GADGET_MIDDLE, self.vertex_node(v, t, primed=True),
                        self.vertex_node(u, t + 1), traverse,
                        ("gmid", u, v, t, v), (v,), (u,), t, t + 1,
                    )
                    self._routes[(u, v, t)] = (fwd,)
                    self._routes[(v, u, t)] = (rev,)
                else:
                    merge = self._node_ids[("g", "e", u, v, t, "m")]
                    split = self._node_ids[("g", "e", u, v, t, "s")]
                    in_u = self._add_arc(
                        GADGET_IN, self.vertex_node(u, t, primed=True), merge, 0,
                        ("gin", u, v, t, u), (u,), (u, v), t, t + 1,
                    )
                    in_v = self._add_arc(
                        GADGET_IN, self.vertex_node(v, t, primed=True), merge, 0,
                        ("gin", u, v, t, v), (v,), (u, v), t, t + 1,
                    )
                    mid = self._add_arc(
                        GADGET_MIDDLE, merge, split, traverse,
                        ("gmid", u, v, t), (u, v), (u, v), t, t + 1,
                    )
                    out_u = self._add_arc(
                        GADGET_OUT, split, self.vertex_node(u, t + 1), 0,
                        ("gout", u, v, t, u), (u, v), (u,), t, t + 1,
                    )
                    out_v = self._add_arc(
                        GADGET_OUT, split, self.vertex_node(v, t + 1), 0,
                        ("gout", u, v, t, v), (u, v), (v,), t, t + 1,
                    )
                    self._routes[(u, v, t)] = (in_u, mid, out_v)
                    self._routes[(v, u, t)] = (in_v, mid, out_u)
            if rule is MotionRule.GRID_DIAGONAL:
                for idx, square in enumerate(inst.diagonals):
                    corners = tuple(sorted(square.corners))
                    merge = self._node_ids[("g", "d", idx, t, "m")]
                    split = self._node_ids[("g", "d", idx, t, "s")]
                    ins = {}
                    for w in corners:
                        ins[w] = self._add_arc(
                            DIAG_IN, self.vertex_node(w, t, primed=True), merge, 0,
                            ("din", idx, t, w), (w,), corners, t, t + 1,
                        )
                    mid = self._add_arc(
                        DIAG_MIDDLE, merge, split, traverse,
                        ("dmid", idx, t), corners, corners, t, t + 1,
                    )
                    outs = {}
                    for w in corners:
                        outs[w] = self._add_arc(
                            DIAG_OUT, split, self.vertex_node(w, t + 1), 0,
                            ("dout", idx, t, w), corners, (w,), t, t + 1,
                        )
                    for (a, b) in (square.first, square.second):
                        self._routes.setdefault((a, b, t), (ins[a], mid, outs[b]))
                        self._routes.setdefault((b, a, t), (ins[b], mid, outs[a]))

        for t in range(1, T + 1):
            for v in range(graph.vertex_count):
                self._add_arc(
                    THRU, self.vertex_node(v, t), self.vertex_node(v, t, primed=True),
                    0, ("thru", v, t), (v,), (v,), t, t,
                )

        for robot in range(1, inst.n + 1):
            self._add_arc(
                LOOPBACK,
                self.vertex_node(inst.goal_of(robot), T, primed=True),
                self.vertex_node(inst.start_of(robot), 0),
                0, ("loop", robot), (), (), T, 0,
            )

    # -- lookups ------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def node_count(self) -> int:
        return len(self.node_tags)

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    def vertex_node(self, v: int, t: int, primed: bool = False) -> int:
        if t == 0:
            primed = False
        return self._node_ids[("v", v, t, 1 if primed else 0)]

    def arc_by_tag(self, tag: tuple) -> int:
        return self._arc_ids[tag]

    def loopback_arc(self, robot: int) -> int:
        if not (1 <= robot <= self.n):
            raise ExpansionError(f"robot {robot} out of range")
        return self.arc_count - self.n + robot - 1

    def move_route(self, u: int, v: int, t: int) -> tuple[int, ...]:
        """Arc indices realizing a u -> v move over the step t -> t+1."""
        try:
            return self._routes[(u, v, t)]
        except KeyError:
            raise ExpansionError(f"no route for move {u}->{v} at step {t}") from None

    def census(self) -> dict[str, int]:
        counts: dict[str, int] = {
            "nodes": self.node_count,
            "vertex_nodes": sum(1 for tag in self.node_tags if tag[0] == "v"),
            "gadget_nodes": sum(1 for tag in self.node_tags if tag[0] == "g"),
            "arcs": self.arc_count,
        }
        for arc in self.arcs:
            counts[arc.kind] = counts.get(arc.kind, 0) + 1
        return counts

    def debug_dump(self) -> str:
        lines = [
            f"network horizon={self.horizon} robots={self.n} "
            f"rule={self.instance.rule.value} traverse={self.cost_profile.traverse_cost} "
            f"stay={self.cost_profile.stay_cost}",
            f"nodes {self.node_count}",
        ]
        for node_id, tag in enumerate(self.node_tags):
            lines.append(f"  {node_id} " + " ".join(str(x) for x in tag))
        lines.append(f"arcs {self.arc_count}")
        for arc in self.arcs:
            tag = " ".join(str(x) for x in arc.tag)
            lines.append(f"  {arc.index} {arc.tail}->{arc.head} cost={arc.cost} {tag}")
        lines.append("sources " + " ".join(str(s) for s in self.sources))
        lines.append("sinks " + " ".join(str(s) for s in self.sinks))
        return "\n".join(lines) + "\n"


def expand(instance: MapfInstance, horizon: int,
           cost_profile: CostProfile = CostProfile()) -> TimeExpandedNetwork:
    """Build the time-expanded network for the instance at the given horizon."""
    return TimeExpandedNetwork(instance, horizon, cost_profile)


@dataclass(frozen=True)
class Flow:
    """Integral per-robot flow: the set of arcs carrying robot i's unit."""

    per_robot: tuple[frozenset[int], ...]

    @property
    def n(self) -> int:
        return len(self.per_robot)

    def arcs_of(self, robot: int) -> frozenset[int]:
        return self.per_robot[robot - 1]

    def total_cost(self, net: TimeExpandedNetwork) -> int:
        return sum(net.arcs[a].cost for arcs in self.per_robot for a in arcs)


def paths_to_flow(net: TimeExpandedNetwork, sol: Solution) -> Flow:
    """Route a valid solution through the network, one unit flow per robot.

    Moves go through their gadget (or direct arc), waits through stay arcs,
    and every robot uses its own loopback, closing the circulation.
    """
    if sol.horizon != net.horizon:
        raise FlowError(f"solution horizon {sol.horizon} != network horizon {net.horizon}")
    report = validate_solution(net.instance, sol)
    if not report.ok:
        raise FlowError(f"solution invalid: {report.violations[0].detail}")
    T = net.horizon
    per_robot = []
    for robot in range(1, net.n + 1):
        path = sol.path_of(robot)
        arcs = {net.loopback_arc(robot)}
        for t in range(1, T + 1):
            arcs.add(net.arc_by_tag(("thru", path[t], t)))
        for t in range(T):
            if path[t] == path[t + 1]:
                arcs.add(net.arc_by_tag(("stay", path[t], t)))
            else:
                arcs.update(net.move_route(path[t], path[t + 1], t))
        per_robot.append(frozenset(arcs))
    return Flow(tuple(per_robot))


def verify_flow(net: TimeExpandedNetwork, flow: Flow) -> None:
    """Raise FlowError naming the first violated capacity/conservation/value rule."""
    if flow.n != net.n:
        raise FlowError(f"flow covers {flow.n} robots, network has {net.n}")
    usage: dict[int, int] = {}
    for robot in range(1, net.n + 1):
        for a in flow.arcs_of(robot):
            if not (0 <= a < net.arc_count):
                raise FlowError(f"robot {robot} uses unknown arc {a}")
            usage[a] = usage.get(a, 0) + 1
    for a, used in sorted(usage.items()):
        if used > net.arcs[a].capacity:
            raise FlowError(f"capacity violated on arc {a} ({net.arcs[a].tag}): {used} > 1")
    for robot in range(1, net.n + 1):
        arcs = flow.arcs_of(robot)
        for other in range(1, net.n + 1):
            lb = net.loopback_arc(other)
            if other == robot and lb not in arcs:
                raise FlowError(f"robot {robot} has flow value 0 (own loopback unused)")
            if other != robot and lb in arcs:
                raise FlowError(f"robot {robot} uses robot {other}'s loopback")
        balance: dict[int, int] = {}
        for a in arcs:
            arc = net.arcs[a]
            if arc.tail == arc.head:
                continue
            balance[arc.tail] = balance.get(arc.tail, 0) - 1
            balance[arc.head] = balance.get(arc.head, 0) + 1
        for node, net_flow in sorted(balance.items()):
            if net_flow != 0:
                raise FlowError(
                    f"conservation violated for robot {robot} at node {node} "
                    f"({net.node_tags[node]}): imbalance {net_flow}"
                )


def flow_to_paths(net: TimeExpandedNetwork, flow: Flow) -> Solution:
    """Convert a feasible value-n flow back to per-robot vertex sequences."""
    verify_flow(net, flow)
    T = net.horizon
    paths = []
    for robot in range(1, net.n + 1):
        arcs = set(flow.arcs_of(robot))
        arcs.discard(net.loopback_arc(robot))
        v = net.instance.start_of(robot)
        path = [v]
        node = net.vertex_node(v, 0)
        for t in range(T):
            node, v = _advance(net, arcs, node, t)
            path.append(v)
        if arcs:
            stray = sorted(arcs)[0]
            raise FlowError(
                f"robot {robot} flow has stray arc {stray} ({net.arcs[stray].tag}) "
                "unreachable from its start"
            )
        if v != net.instance.goal_of(robot):
            raise FlowError(f"robot {robot} flow terminates at {v}, not its goal")
        paths.append(tuple(path))
    return Solution(tuple(paths))


def _advance(net: TimeExpandedNetwork, arcs: set[int], node: int, t: int) -> tuple[int, int]:
    """Follow robot arcs from a primed-level node across one time step."""
    def take(cur: int) -> Arc:
        flowed = [a for a in net.out_arcs[cur] if a in arcs]
        if len(flowed) != 1:
            raise FlowError(
                f"node {cur} ({net.node_tags[cur]}) has {len(flowed)} flowed out-arcs, "
                "expected exactly 1"
            )
        arcs.discard(flowed[0])
        return net.arcs[flowed[0]]

    arc = take(node)
    while net.node_tags[arc.head][0] != "v":
        arc = take(arc.head)
    v = net.node_tags[arc.head][1]
    thru = take(arc.head)
    return thru.head, v
