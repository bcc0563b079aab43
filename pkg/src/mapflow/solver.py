"""Exact 0/1 integer-program solving.

Three interchangeable routes behind one outcome contract:

* an internal branch-and-bound engine over an exact rational (Fraction)
  bounded-variable simplex relaxation -- deterministic, tolerance-free,
  meant for small models;
* a HiGHS-backed engine (scipy.optimize.milp) for larger models;
* an external-command bridge that exports LP text, runs a user-supplied
  solver, and parses a minimal ``<variable> <value>`` solution file.

Every route re-validates any claimed optimal assignment against the raw
constraint rows by direct integer substitution before returning it.
"""
from __future__ import annotations

import subprocess
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, milp

from .ilp import EQUAL, LESS_EQUAL, MAXIMIZE, IlpModel, check_assignment


class SolverError(RuntimeError):
    """Engine failure or malformed model."""


class BridgeError(SolverError):
    """External solver invocation or result verification failure."""


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    LIMIT = "limit"


@dataclass(frozen=True)
class Assignment:
    values: tuple[int, ...]
    objective: int


@dataclass(frozen=True)
class SolveOutcome:
    status: SolveStatus
    assignment: Optional[Assignment] = None
    reason: Optional[str] = None
    nodes: int = 0
    engine: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


@dataclass(frozen=True)
class SolverConfig:
    """Limits and engine selection.

    engine: "auto" picks the internal exact engine for small models and HiGHS
    otherwise.  threads and seed are accepted for interface stability; the
    internal engine is single-threaded and deterministic, so with threads=1
    identical inputs give byte-identical outcomes.
    """

    time_limit: Optional[float] = None
    node_limit: Optional[int] = None
    threads: int = 1
    seed: int = 0
    engine: str = "auto"

    # auto-dispatch thresholds: exact rational simplex is tolerance-free but
    # slow once multiflow relaxations go fractional, so keep it to small models
    internal_max_vars: int = 100
    internal_max_rows: int = 150


def _verified(model: IlpModel, values: tuple[int, ...], engine: str,
              status: SolveStatus, reason: Optional[str] = None,
              nodes: int = 0) -> SolveOutcome:
    problems = check_assignment(model, values)
    if problems:
        raise SolverError(f"{engine} returned an invalid assignment: {problems[0]}")
    assignment = Assignment(values, model.objective_value(values))
    return SolveOutcome(status, assignment, reason=reason, nodes=nodes, engine=engine)


def solve(model: IlpModel, config: SolverConfig = SolverConfig()) -> SolveOutcome:
    """Solve to proven optimality within limits; limits yield Limit, never a false Infeasible."""
    if config.engine == "internal":
        return _solve_internal(model, config)
    if config.engine == "highs":
        return _solve_highs(model, config)
    if config.engine != "auto":
        raise SolverError(f"unknown engine {config.engine!r}")
    if model.num_vars <= config.internal_max_vars and len(model.rows) <= config.internal_max_rows:
        return _solve_internal(model, config)
    return _solve_highs(model, config)


# -- HiGHS backend -----------------------------------------------------------


def _solve_highs(model: IlpModel, config: SolverConfig) -> SolveOutcome:
    num = model.num_vars
    c = np.zeros(num)
    for var, coef in model.objective:
        c[var] += coef
    if model.sense == MAXIMIZE:
        c = -c
    lb = np.zeros(num)
    ub = np.ones(num)
    for var, value in model.fixed.items():
        lb[var] = ub[var] = value

    data, rows_idx, cols_idx = [], [], []
    row_lb = np.empty(len(model.rows))
    row_ub = np.empty(len(model.rows))
    for r, row in enumerate(model.rows):
        for var, coef in row.coeffs:
            rows_idx.append(r)
            cols_idx.append(var)
            data.append(coef)
        if row.relation == LESS_EQUAL:
            row_lb[r] = -np.inf
            row_ub[r] = row.rhs
        else:
            row_lb[r] = row_ub[r] = row.rhs
    A = sp.csc_matrix((data, (rows_idx, cols_idx)), shape=(len(model.rows), num))

    options: dict = {"mip_rel_gap": 0.0}
    if config.time_limit is not None:
        options["time_limit"] = config.time_limit
    if config.node_limit is not None:
        options["node_limit"] = config.node_limit
    res = milp(
        c,
        constraints=[LinearConstraint(A, row_lb, row_ub)],
        integrality=np.ones(num),
        bounds=Bounds(lb, ub),
        options=options,
    )
    if res.status == 0:
        values = tuple(int(round(x)) for x in res.x)
        return _verified(model, values, "highs", SolveStatus.OPTIMAL)
    if res.status == 2:
        return SolveOutcome(SolveStatus.INFEASIBLE, engine="highs")
    if res.status == 1:
        reason = "time" if config.time_limit is not None else "nodes"
        best = None
        if res.x is not None:
            values = tuple(int(round(x)) for x in res.x)
            if not check_assignment(model, values):
                best = Assignment(values, model.objective_value(values))
        return SolveOutcome(SolveStatus.LIMIT, best, reason=reason, engine="highs")
    if res.status == 3:
        raise SolverError("model reported unbounded; 0/1 models cannot be unbounded")
    raise SolverError(f"HiGHS failed: {res.message}")


# -- internal exact engine ---------------------------------------------------

_ZERO = Fraction(0)
_ONE = Fraction(1)


class _LpResult:
    __slots__ = ("feasible", "objective", "values")

    def __init__(self, feasible: bool, objective: Optional[Fraction] = None,
                 values: Optional[list[Fraction]] = None):
        self.feasible = feasible
        self.objective = objective
        self.values = values


def _lp_relaxation(model: IlpModel, domains: dict[int, int]) -> _LpResult:
    """Exact bounded-variable two-phase simplex on the 0/1 relaxation.

    domains maps variable -> fixed value; free variables range over [0, 1].
    Minimizes internally; callers negate for maximization.
    """
    num_struct = model.num_vars
    lo: list[Optional[Fraction]] = []
    hi: list[Optional[Fraction]] = []
    for var in range(num_struct):
        fixed = domains.get(var)
        if fixed is None:
            lo.append(_ZERO)
            hi.append(_ONE)
        else:
            lo.append(Fraction(fixed))
            hi.append(Fraction(fixed))

    m = len(model.rows)
    cols = num_struct + sum(1 for row in model.rows if row.relation == LESS_EQUAL)
    tableau = [[_ZERO] * (cols + m) for _ in range(m)]
    rhs: list[Fraction] = []
    slack_col = num_struct
    for r, row in enumerate(model.rows):
        trow = tableau[r]
        for var, coef in row.coeffs:
            trow[var] += Fraction(coef)
        if row.relation == LESS_EQUAL:
            trow[slack_col] = _ONE
            lo.append(_ZERO)
            hi.append(None)
            slack_col += 1
        rhs.append(Fraction(row.rhs))

    c_obj = [_ZERO] * cols
    sign = Fraction(-1) if model.sense == MAXIMIZE else _ONE
    for var, coef in model.objective:
        c_obj[var] += sign * Fraction(coef)

    # Nonbasic start: everything at its lower bound.
    at_upper = [False] * (cols + m)
    values = [lo[j] if lo[j] is not None else _ZERO for j in range(cols)]

    # Artificial columns give the initial identity basis.
    basis = []
    beta = []
    for r in range(m):
        residual = rhs[r] - sum(tableau[r][j] * values[j] for j in range(cols)
                                if tableau[r][j] != 0)
        art = cols + r
        if residual >= 0:
            tableau[r][art] = _ONE
            beta.append(residual)
        else:
            for j in range(cols + m):
                if tableau[r][j] != 0:
                    tableau[r][j] = -tableau[r][j]
            tableau[r][art] = _ONE
            beta.append(-residual)
        lo.append(_ZERO)
        hi.append(None)
        basis.append(art)

    def run_phase(d: list[Fraction], banned_from: int) -> None:
        guard = 0
        while True:
            guard += 1
            if guard > 50000:
                raise SolverError("simplex pivot guard tripped")
            in_basis = set(basis)
            entering = -1
            for j in range(banned_from):
                if j in in_basis or lo[j] == hi[j]:
                    continue
                dj = d[j]
                if (dj < 0 and not at_upper[j]) or (dj > 0 and at_upper[j]):
                    entering = j
                    break
            if entering < 0:
                return
            sigma = -1 if at_upper[entering] else 1
            limit: Optional[Fraction] = None
            if hi[entering] is not None:
                limit = hi[entering] - lo[entering]
            leave_row = -1
            for r in range(m):
                coef = tableau[r][entering] * sigma
                if coef > 0:
                    cap = (beta[r] - lo[basis[r]]) / coef
                elif coef < 0:
                    if hi[basis[r]] is None:
                        continue
                    cap = (hi[basis[r]] - beta[r]) / (-coef)
                else:
                    continue
                if limit is None or cap < limit or (
                    cap == limit and leave_row >= 0 and basis[r] < basis[leave_row]
                ):
                    if limit is None or cap < limit:
                        leave_row = r
                        limit = cap
                    elif leave_row >= 0 and basis[r] < basis[leave_row]:
                        leave_row = r
            if limit is None:
                raise SolverError("unbounded relaxation; bounded models cannot do this")
            step = sigma * limit
            if step != 0:
                for r in range(m):
                    if tableau[r][entering] != 0:
                        beta[r] -= tableau[r][entering] * step
            if leave_row < 0:
                at_upper[entering] = not at_upper[entering]
                continue
            # Pivot: entering becomes basic in leave_row.
            leaving = basis[leave_row]
            coef = tableau[leave_row][entering] * sigma
            at_upper[leaving] = coef < 0
            entering_base = hi[entering] if at_upper[entering] else lo[entering]
            assert entering_base is not None
            new_value = entering_base + step
            basis[leave_row] = entering
            beta[leave_row] = new_value
            pivot = tableau[leave_row][entering]
            prow = tableau[leave_row]
            if pivot != 1:
                inv = _ONE / pivot
                for j in range(cols + m):
                    if prow[j] != 0:
                        prow[j] *= inv
            for r in range(m):
                if r == leave_row:
                    continue
                factor = tableau[r][entering]
                if factor != 0:
                    row_r = tableau[r]
                    for j in range(cols + m):
                        if prow[j] != 0:
                            row_r[j] -= factor * prow[j]
            factor = d[entering]
            if factor != 0:
                for j in range(cols + m):
                    if prow[j] != 0:
                        d[j] -= factor * prow[j]

    # Phase 1: drive artificials to zero.
    d1 = [_ZERO] * (cols + m)
    for j in range(cols + m):
        total = _ZERO
        for r in range(m):
            total += tableau[r][j]
        d1[j] = (_ONE if j >= cols else _ZERO) - total
    run_phase(d1, banned_from=cols + m)
    infeas = sum((beta[r] for r in range(m) if basis[r] >= cols), _ZERO)
    if infeas > 0:
        return _LpResult(False)

    # Phase 2 with the real objective; artificials may not re-enter.
    full_c = c_obj + [_ZERO] * m
    d2 = list(full_c)
    for r in range(m):
        cb = full_c[basis[r]] if basis[r] < cols else _ZERO
        if cb != 0:
            for j in range(cols + m):
                if tableau[r][j] != 0:
                    d2[j] -= cb * tableau[r][j]
    run_phase(d2, banned_from=cols)

    point = [_ZERO] * cols
    for j in range(cols):
        if lo[j] == hi[j]:
            point[j] = lo[j]  # type: ignore[assignment]
        elif at_upper[j]:
            assert hi[j] is not None
            point[j] = hi[j]  # type: ignore[assignment]
        else:
            point[j] = lo[j]  # type: ignore[assignment]
    for r in range(m):
        if basis[r] < cols:
            point[basis[r]] = beta[r]
    objective = sum((c_obj[j] * point[j] for j in range(cols) if c_obj[j] != 0), _ZERO)
    return _LpResult(True, objective, point[:num_struct])


def _propagate(model: IlpModel, domains: dict[int, int],
               rows_of: list[list[int]]) -> Optional[dict[int, int]]:
    """Fixpoint 0/1 bound propagation over the rows; None on conflict."""
    domains = dict(domains)
    pending = list(range(len(model.rows)))
    in_queue = [True] * len(model.rows)
    while pending:
        r = pending.pop()
        in_queue[r] = False
        row = model.rows[r]
        min_act = 0
        max_act = 0
        for var, coef in row.coeffs:
            fixed = domains.get(var)
            if fixed is not None:
                min_act += coef * fixed
                max_act += coef * fixed
            elif coef > 0:
                max_act += coef
            else:
                min_act += coef
        if min_act > row.rhs:
            return None
        if row.relation == EQUAL and max_act < row.rhs:
            return None
        for var, coef in row.coeffs:
            if var in domains:
                continue
            lo_other = min_act - min(0, coef)
            hi_other = max_act - max(0, coef)
            forced = None
            for val in (0, 1):
                bad_low = lo_other + coef * val > row.rhs
                bad_high = row.relation == EQUAL and hi_other + coef * val < row.rhs
                if bad_low or bad_high:
                    if forced is None:
                        forced = 1 - val
                    else:
                        return None
            if forced is not None:
                domains[var] = forced
                for r2 in rows_of[var]:
                    if not in_queue[r2]:
                        in_queue[r2] = True
                        pending.append(r2)
    return domains


def _solve_internal(model: IlpModel, config: SolverConfig) -> SolveOutcome:
    rows_of: list[list[int]] = [[] for _ in range(model.num_vars)]
    for r, row in enumerate(model.rows):
        for var, _ in row.coeffs:
            rows_of[var].append(r)

    maximizing = model.sense == MAXIMIZE
    best_value: Optional[int] = None
    best_values: Optional[tuple[int, ...]] = None
    nodes = 0
    deadline = None if config.time_limit is None else time.monotonic() + config.time_limit
    limit_reason: Optional[str] = None

    stack: list[dict[int, int]] = [dict(model.fixed)]
    while stack:
        if deadline is not None and time.monotonic() > deadline:
            limit_reason = "time"
            break
        if config.node_limit is not None and nodes >= config.node_limit:
            limit_reason = "nodes"
            break
        domains = stack.pop()
        nodes += 1
        propagated = _propagate(model, domains, rows_of)
        if propagated is None:
            continue
        lp = _lp_relaxation(model, propagated)
        if not lp.feasible:
            continue
        assert lp.objective is not None and lp.values is not None
        # Internal LP minimizes; recover the model-sense bound.
        bound_frac = -lp.objective if maximizing else lp.objective
        if maximizing:
            bound = bound_frac.numerator // bound_frac.denominator  # floor
        else:
            bound = -((-bound_frac.numerator) // bound_frac.denominator)  # ceil
        if best_value is not None:
            if maximizing and bound <= best_value:
                continue
            if not maximizing and bound >= best_value:
                continue
        branch_var = -1
        for var in range(model.num_vars):
            if var in propagated:
                continue
            if lp.values[var].denominator != 1:
                branch_var = var
                break
        if branch_var < 0:
            values = [0] * model.num_vars
            for var in range(model.num_vars):
                fixed = propagated.get(var)
                values[var] = fixed if fixed is not None else int(lp.values[var])
            candidate = tuple(values)
            value = model.objective_value(candidate)
            if (best_value is None
                    or (maximizing and value > best_value)
                    or (not maximizing and value < best_value)):
                problems = check_assignment(model, candidate)
                if problems:
                    raise SolverError(f"internal engine produced bad incumbent: {problems[0]}")
                best_value = value
                best_values = candidate
            continue
        zero = dict(propagated)
        zero[branch_var] = 0
        one = dict(propagated)
        one[branch_var] = 1
        stack.append(zero)
        stack.append(one)  # popped first: explore the 1-branch first

    if limit_reason is not None:
        best = None
        if best_values is not None:
            best = Assignment(best_values, best_value)  # type: ignore[arg-type]
        return SolveOutcome(SolveStatus.LIMIT, best, reason=limit_reason,
                            nodes=nodes, engine="internal")
    if best_values is None:
        return SolveOutcome(SolveStatus.INFEASIBLE, nodes=nodes, engine="internal")
    return _verified(model, best_values, "internal", SolveStatus.OPTIMAL, nodes=nodes)


# -- external bridge ---------------------------------------------------------


def default_solution_parser(text: str) -> tuple[str, dict[str, int]]:
    """Parse the bridge dialect: a ``status`` line then ``<variable> <value>`` lines."""
    status = None
    values: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if status is None:
            if parts[0] != "status" or len(parts) != 2:
                raise BridgeError(f"solution line {lineno}: expected 'status <kind>'")
            status = parts[1]
            continue
        if len(parts) != 2:
            raise BridgeError(f"solution line {lineno}: expected '<variable> <value>'")
        name, rawval = parts
        try:
            num = float(rawval)
        except ValueError:
            raise BridgeError(f"solution line {lineno}: bad value {rawval!r}") from None
        rounded = round(num)
        if abs(num - rounded) > 1e-6 or rounded not in (0, 1):
            raise BridgeError(f"solution line {lineno}: value {rawval!r} is not 0/1")
        values[name] = int(rounded)
    if status is None:
        raise BridgeError("solution file has no status line")
    return status, values


def solve_external(
    model: IlpModel,
    command_template: str,
    workdir: Path | str,
    parse_solution: Callable[[str], tuple[str, dict[str, int]]] = default_solution_parser,
    timeout: Optional[float] = None,
) -> SolveOutcome:
    """Export LP, run the command ({lp}/{sol} placeholders), verify, return.

    The command must exit 0 and write the solution file; any process failure,
    unparseable file, or constraint-violating assignment raises BridgeError.
    """
    if "{lp}" not in command_template or "{sol}" not in command_template:
        raise BridgeError("command template needs {lp} and {sol} placeholders")
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    lp_path = workdir / "model.lp"
    sol_path = workdir / "solution.txt"
    from .ilp import export_lp

    with open(lp_path, "wb") as fh:
        export_lp(model, fh)
    command = command_template.format(lp=str(lp_path), sol=str(sol_path))
    proc = subprocess.run(
        command, shell=True, cwd=workdir, capture_output=True, text=True, timeout=timeout
    )
    if proc.returncode != 0:
        raise BridgeError(
            f"external solver exited {proc.returncode}: {proc.stderr.strip()[:500]}"
        )
    if not sol_path.exists():
        raise BridgeError(f"external solver wrote no solution file at {sol_path}")
    status, named = parse_solution(sol_path.read_text())
    if status == "infeasible":
        return SolveOutcome(SolveStatus.INFEASIBLE, engine="external")
    if status == "limit":
        return SolveOutcome(SolveStatus.LIMIT, reason="external", engine="external")
    if status != "optimal":
        raise BridgeError(f"unknown solution status {status!r}")
    values = [0] * model.num_vars
    for var, fixed_value in model.fixed.items():
        values[var] = fixed_value
    name_to_var = {model.var_name(v): v for v in range(model.num_vars)}
    for name, value in named.items():
        var = name_to_var.get(name)
        if var is None:
            raise BridgeError(f"unknown variable {name!r} in solution file")
        values[var] = value
    candidate = tuple(values)
    problems = check_assignment(model, candidate)
    if problems:
        raise BridgeError(f"external assignment violates the model: {problems[0]}")
    return SolveOutcome(
        SolveStatus.OPTIMAL,
        Assignment(candidate, model.objective_value(candidate)),
        engine="external",
    )
