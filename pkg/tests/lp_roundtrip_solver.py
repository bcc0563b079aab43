"""Stand-in external solver: parse an LP file, enumerate, write a solution file.

Usage: python lp_roundtrip_solver.py <model.lp> <solution.txt>

Understands the LP subset the exporter emits (Maximize/Minimize, Subject To
with <= and = rows, Bounds fixings, Binary section) and solves by exhaustive
enumeration, so it shares no code with the package under test.
"""
from __future__ import annotations

import sys


def parse_terms(tokens):
    terms = []
    sign = 1
    pending = None
    for tok in tokens:
        if tok == "+":
            sign = 1
        elif tok == "-":
            sign = -1
        elif tok.lstrip("+-").isdigit():
            pending = sign * int(tok)
        else:
            coef = pending if pending is not None else sign
            terms.append((tok, coef))
            pending = None
            sign = 1
    return terms


def parse_lp(text):
    section = None
    sense = None
    objective = []
    rows = []
    fixed = {}
    binaries = []
    entries = []  # accumulated logical lines for obj/constraints
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        lowered = line.lower()
        if lowered in ("maximize", "minimize", "subject to", "bounds", "binary", "end"):
            if current is not None:
                entries.append((section, current))
                current = None
            if lowered in ("maximize", "minimize"):
                sense = "max" if lowered == "maximize" else "min"
                section = "objective"
            else:
                section = lowered
            continue
        if section in ("objective", "subject to"):
            if ":" in line:
                if current is not None:
                    entries.append((section, current))
                current = line
            else:
                current += " " + line
        elif section == "bounds":
            name, eq, value = line.split()
            assert eq == "="
            fixed[name] = int(value)
        elif section == "binary":
            binaries.append(line)
    if current is not None:
        entries.append((section, current))

    for kind, entry in entries:
        label, body = entry.split(":", 1)
        if kind == "objective":
            objective = parse_terms(body.split())
        else:
            tokens = body.split()
            if "<=" in tokens:
                idx = tokens.index("<=")
                relation = "<="
            else:
                idx = tokens.index("=")
                relation = "="
            rows.append((parse_terms(tokens[:idx]), relation, int(tokens[idx + 1])))
    return sense, objective, rows, fixed, binaries


def main():
    lp_path, sol_path = sys.argv[1], sys.argv[2]
    sense, objective, rows, fixed, binaries = parse_lp(open(lp_path).read())
    free = [v for v in binaries if v not in fixed]
    if len(free) > 18:
        raise SystemExit(f"too many free variables to enumerate: {len(free)}")
    best = None
    best_values = None
    for bits in range(1 << len(free)):
        values = dict(fixed)
        for pos, name in enumerate(free):
            values[name] = (bits >> pos) & 1
        ok = True
        for terms, relation, rhs in rows:
            activity = sum(coef * values[name] for name, coef in terms)
            if relation == "<=" and activity > rhs:
                ok = False
                break
            if relation == "=" and activity != rhs:
                ok = False
                break
        if not ok:
            continue
        value = sum(coef * values[name] for name, coef in objective)
        if best is None or (sense == "max" and value > best) \
                or (sense == "min" and value < best):
            best = value
            best_values = dict(values)
    with open(sol_path, "w") as fh:
        if best_values is None:
            fh.write("status infeasible\n")
            return
        fh.write("status optimal\n")
        for name in binaries:
            fh.write(f"{name} {best_values[name]}\n")


if __name__ == "__main__":
    main()
