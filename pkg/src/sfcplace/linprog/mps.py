"""Free-format MPS export for cross-checking with external solvers."""

from __future__ import annotations

import math
import re

from .lp import EQ, GE, LE, LinearProgram

_SENSE = {LE: "L", GE: "G", EQ: "E"}


def _name(raw: str, fallback: str) -> str:
    cleaned = re.sub(r"\s+", "_", raw) if raw else fallback
    return cleaned


def _num(v: float) -> str:
    return repr(float(v))


def write_mps(lp: LinearProgram, integer=(), name: str = "SFCPLACE") -> str:
    """Render ``lp`` (minimization) as free-format MPS text; ``integer`` marks integer columns."""
    integer = set(integer)
    cols = [_name(v.name, f"C{i}") for i, v in enumerate(lp.variables)]
    rows = [_name(c.name, f"R{i}") for i, c in enumerate(lp.constraints)]
    by_col = [[] for _ in cols]
    for r, con in enumerate(lp.constraints):
        for j, a in con.coeffs.items():
            by_col[j].append((rows[r], a))

    out = [f"NAME {name}", "ROWS", " N COST"]
    out += [f" {_SENSE[c.sense]} {rows[r]}" for r, c in enumerate(lp.constraints)]
    out.append("COLUMNS")
    in_int = False
    for j, col in enumerate(cols):
        is_int = j in integer
        if is_int != in_int:
            marker = "'INTORG'" if is_int else "'INTEND'"
            out.append(f" MARKER 'MARKER' {marker}")
            in_int = is_int
        if lp.objective[j]:
            out.append(f" {col} COST {_num(lp.objective[j])}")
        for row, a in by_col[j]:
            out.append(f" {col} {row} {_num(a)}")
        if not lp.objective[j] and not by_col[j]:
            out.append(f" {col} COST 0.0")
    if in_int:
        out.append(" MARKER 'MARKER' 'INTEND'")
    out.append("RHS")
    out += [f" RHS {rows[r]} {_num(c.rhs)}" for r, c in enumerate(lp.constraints) if c.rhs]
    out.append("BOUNDS")
    for j, v in enumerate(lp.variables):
        lo, hi = v.lb, v.ub
        if lo == hi:
            out.append(f" FX BND {cols[j]} {_num(lo)}")
            continue
        if math.isinf(lo) and math.isinf(hi):
            out.append(f" FR BND {cols[j]}")
            continue
        if math.isinf(lo):
            out.append(f" MI BND {cols[j]}")
        elif lo != 0:
            out.append(f" LO BND {cols[j]} {_num(lo)}")
        if not math.isinf(hi):
            out.append(f" UP BND {cols[j]} {_num(hi)}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"
