"""Linear programs and a dense two-phase bounded-variable simplex.

Nonbasic variables sit at a bound (lower after shifting to zero, or upper);
upper bounds are handled in the ratio test instead of as extra rows.
Pricing is Dantzig's largest reduced cost until a run of degenerate pivots,
after which Bland's smallest-index rule is used for the rest of the phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .. import kernels

INF = math.inf

LE, EQ, GE = "<=", "=", ">="
SENSES = (LE, EQ, GE)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
DEGENERATE_RUN = 50


@dataclass
class Variable:
    name: str
    lb: float = 0.0
    ub: float = INF


@dataclass
class Constraint:
    coeffs: dict[int, float]
    sense: str
    rhs: float
    name: str = ""


@dataclass
class LinearProgram:
    """Minimize ``objective @ x`` subject to rows and variable bounds."""

    variables: list[Variable] = field(default_factory=list)
    objective: list[float] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def add_variable(self, name: str, lb: float = 0.0, ub: float = INF, cost: float = 0.0) -> int:
        if lb > ub:
            raise ValueError(f"variable {name!r}: lower bound {lb} > upper bound {ub}")
        self.variables.append(Variable(name, lb, ub))
        self.objective.append(cost)
        return len(self.variables) - 1

    def add_constraint(self, coeffs: Mapping[int, float], sense: str, rhs: float, name: str = "") -> int:
        if sense not in SENSES:
            raise ValueError(f"unknown relation {sense!r}")
        row = {}
        for i, a in coeffs.items():
            if not 0 <= i < len(self.variables):
                raise ValueError(f"constraint {name!r} references undeclared variable {i}")
            if a:
                row[i] = row.get(i, 0.0) + a
        self.constraints.append(Constraint(row, sense, rhs, name))
        return len(self.constraints) - 1

    def copy(self) -> "LinearProgram":
        return LinearProgram([Variable(v.name, v.lb, v.ub) for v in self.variables],
                             list(self.objective),
                             [Constraint(dict(c.coeffs), c.sense, c.rhs, c.name)
                              for c in self.constraints])

    def dense(self):
        """``(c, A, senses, b, lb, ub)`` as numpy arrays."""
        n = self.n_vars
        A = np.zeros((len(self.constraints), n))
        for i, con in enumerate(self.constraints):
            for j, a in con.coeffs.items():
                A[i, j] = a
        return (np.asarray(self.objective, dtype=float), A,
                [c.sense for c in self.constraints],
                np.array([c.rhs for c in self.constraints], dtype=float),
                np.array([v.lb for v in self.variables], dtype=float),
                np.array([v.ub for v in self.variables], dtype=float))


@dataclass
class LpSolution:
    status: str
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    iterations: int = 0


class _Tableau:
    """Working state of the bounded simplex over ``A x = b, 0 <= x <= u``."""

    def __init__(self, A, b, u):
        self.T = np.ascontiguousarray(A, dtype=float)
        self.u = u
        self.m, self.n = A.shape
        self.value = np.zeros(self.n)
        self.basis = np.zeros(self.m, dtype=np.intp)
        self.b = b
        self.iterations = 0

    def pivot(self, r, j):
        kernels.simplex_pivot(self.T, self.basis, r, j)

    def run(self, c, allowed):
        """Minimize ``c @ x`` from the current basic feasible point."""
        status, its = kernels.simplex_run(self.T, self.u, self.value, self.basis,
                                          np.ascontiguousarray(c, dtype=float),
                                          np.ascontiguousarray(allowed, dtype=bool),
                                          DEGENERATE_RUN, PIVOT_TOL, FEAS_TOL)
        self.iterations += its
        return OPTIMAL if status == 0 else UNBOUNDED


def _standardize(c, A, senses, b, lb, ub):
    """Shift/flip variables to ``0 <= x' <= u'`` and add slacks.

    Fixed variables become constants.  Returns the standard data plus a
    reconstruction map.
    """
    n = len(c)
    cols = []     # (orig index, sign, upper bound) per standard column
    recon = []    # per original var: list of (std col, sign), constant
    for i in range(n):
        l, h = lb[i], ub[i]
        if l == h and np.isfinite(l):
            recon.append(([], l))
        elif np.isfinite(l):
            recon.append(([(len(cols), 1.0)], l))
            cols.append((i, 1.0, h - l))
        elif np.isfinite(h):
            recon.append(([(len(cols), -1.0)], h))
            cols.append((i, -1.0, INF))
        else:
            recon.append(([(len(cols), 1.0), (len(cols) + 1, -1.0)], 0.0))
            cols.append((i, 1.0, INF))
            cols.append((i, -1.0, INF))
    m = A.shape[0]
    const = np.array([r[1] for r in recon])
    rhs = b - A @ const
    ns = len(cols)
    n_slack = sum(1 for s in senses if s != EQ)
    S = np.zeros((m, ns + n_slack))
    cs = np.zeros(ns + n_slack)
    us = np.full(ns + n_slack, INF)
    for k, (i, sign, cap) in enumerate(cols):
        S[:, k] = A[:, i] * sign
        cs[k] = c[i] * sign
        us[k] = cap
    k = ns
    for r, s in enumerate(senses):
        if s == LE:
            S[r, k] = 1.0
            k += 1
        elif s == GE:
            S[r, k] = -1.0
            k += 1
    return S, rhs, cs, us, recon, ns


def simplex(c, A, senses, b, lb, ub) -> LpSolution:
    """Solve ``min c@x`` s.t. ``A x (senses) b``, ``lb <= x <= ub`` from dense arrays."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(len(b), len(c))
    b = np.asarray(b, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if np.any(lb > ub + FEAS_TOL):
        return LpSolution(INFEASIBLE)

    S, rhs, cs, us, recon, ns = _standardize(c, A, senses, b, lb, ub)
    m, n = S.shape
    neg = rhs < 0
    S[neg] *= -1
    rhs = np.where(neg, -rhs, rhs)

    # phase 1: artificial basis
    full = np.hstack([S, np.eye(m)])
    u = np.concatenate([us, np.full(m, INF)])
    tab = _Tableau(full, rhs, u)
    tab.basis[:] = np.arange(n, n + m)
    tab.value[n:] = rhs
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    allowed = np.ones(n + m, dtype=bool)
    tab.run(c1, allowed)
    if tab.value[n:].sum() > FEAS_TOL * max(1.0, np.abs(rhs).max(initial=0.0)):
        return LpSolution(INFEASIBLE, iterations=tab.iterations)

    # drive zero-valued artificials out of the basis; drop redundant rows
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if tab.basis[r] >= n:
            row = tab.T[r, :n]
            nz = np.nonzero(np.abs(row) > PIVOT_TOL)[0]
            if len(nz):
                tab.pivot(r, nz[0])
            else:
                keep[r] = False
    tab.T = np.ascontiguousarray(tab.T[keep][:, :n])
    tab.basis = tab.basis[keep]
    tab.m = int(keep.sum())
    tab.n = n
    tab.u = np.ascontiguousarray(u[:n])
    tab.value = np.ascontiguousarray(tab.value[:n])

    status = tab.run(cs, np.ones(n, dtype=bool))
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=tab.iterations)

    xs = tab.value[:ns]
    x = np.empty(len(c))
    for i, (parts, const) in enumerate(recon):
        x[i] = const + sum(sign * xs[k] for k, sign in parts)
    return LpSolution(OPTIMAL, x, float(c @ x), tab.iterations)


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Optimal basic solution of ``lp``; infeasible/unbounded come back as statuses."""
    return simplex(*lp.dense())
