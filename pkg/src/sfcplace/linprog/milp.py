"""The exact placement model as a MILP, solved by best-first branch-and-bound.

Variable layout (in index order):

* ``y[m, j, u]`` instance counts, integer, for every node ``m``, layer ``j``
  (``0`` source, ``1..k`` chain SFs, ``k+1`` target) and VNF ``u`` of that
  layer; the endpoint layers use one pseudo VNF each.
* ``z[m, j]`` throughput allocations in ``[0, b]``.
* ``x[j, (m, n)]`` flow of commodity ``j`` (traffic leaving layer ``j``) on
  the directed arc ``m -> n``, bounded by the link capacity.

The objective is in integer cents (see :class:`~sfcplace.model.CostModel`).
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..model import (SOURCE_VNF, TARGET_VNF, ChainRequest, CostModel, Costs, Deployment,
                     SubstrateNetwork, VnfCatalog, total_cost, validate_inputs)
from .lp import EQ, GE, INF, LE, OPTIMAL, UNBOUNDED, LinearProgram, simplex

OPTIMAL_STATUS = "optimal"
FEASIBLE_WITH_GAP = "feasible-with-gap"
INFEASIBLE_STATUS = "infeasible"
BUDGET_EXHAUSTED = "budget-exhausted"

INT_TOL = 1e-6


class ExtractionError(RuntimeError):
    """An integer variable came back fractional; signals a solver bug."""


@dataclass(frozen=True)
class SolveLimits:
    time_limit: float = 300.0
    node_limit: int = 200_000
    gap: float = 1e-9

    def __post_init__(self):
        if self.time_limit <= 0 or self.node_limit <= 0 or self.gap < 0:
            raise ValueError("solve budgets must be positive")


@dataclass
class MilpProblem:
    lp: LinearProgram
    integer: frozenset
    y_index: dict
    z_index: dict
    x_index: dict
    gamma: float
    net: SubstrateNetwork
    req: ChainRequest
    cat: VnfCatalog
    cost: CostModel

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not set(self.integer) <= set(range(self.lp.n_vars)):
            raise ValueError("integer set references unknown variables")


@dataclass
class ExactResult:
    status: str
    deployment: Optional[Deployment] = None
    objective: Optional[float] = None
    bound: Optional[float] = None
    nodes: int = 0
    costs: Optional[Costs] = None
    reason: str = ""

    @property
    def accepted(self) -> bool:
        return self.deployment is not None


def _layer_vnfs(req: ChainRequest, cat: VnfCatalog, j: int):
    """``(name, mbps, demand)`` of the VNFs usable in layer ``j``."""
    k = req.length
    if j == 0:
        return [(SOURCE_VNF, req.mbps, {})]
    if j == k + 1:
        return [(TARGET_VNF, req.mbps, {})]
    return [(v.name, v.mbps, dict(v.demand)) for v in cat[req.sfs[j - 1]]]


def _count_bound(net, m, demand) -> int:
    bound = INF
    for r, d in demand.items():
        if d > 0:
            bound = min(bound, math.floor(net.capacity(m, r) / d + 1e-9))
    return int(bound)


def cover_cost(mbps: int, types) -> int:
    """Cheapest ``sum(count * cents)`` with ``sum(count * q) >= mbps``, ignoring capacities.

    ``types`` is a sequence of ``(q, cents)``.
    """
    best = [0] + [INF] * mbps
    for t in range(1, mbps + 1):
        for q, cents in types:
            best[t] = min(best[t], best[max(0, t - q)] + cents)
    return int(best[mbps])


def build_milp(net: SubstrateNetwork, req: ChainRequest, cat: VnfCatalog,
               cost: CostModel, gamma: Optional[float] = None,
               cover_rows: bool = True) -> MilpProblem:
    """Assemble the six constraint families under the aggregate-cost objective.

    With ``cover_rows`` each SF layer also gets the valid inequality "host
    cost of the layer >= cheapest instance mix covering ``b`` on an unbounded
    node", which closes most of the relaxation gap caused by fractional
    instance counts.
    """
    validate_inputs(net, req, cat)
    k = req.length
    b = req.mbps
    gamma = float(b if gamma is None else gamma)
    beta = cost.beta_cents
    lp = LinearProgram()
    y_index, z_index, x_index = {}, {}, {}
    vnf_cents = {}
    for sf in req.sfs:
        for v in cat[sf]:
            vnf_cents[sf, v.name] = cost.host_cents(v)

    for m in net.node_ids:
        for j in range(k + 2):
            for name, _, demand in _layer_vnfs(req, cat, j):
                if j == 0:
                    lo = hi = 1.0 if m == req.source else 0.0
                    cents = 0
                elif j == k + 1:
                    lo = hi = 1.0 if m == req.target else 0.0
                    cents = 0
                else:
                    lo, hi = 0.0, float(_count_bound(net, m, demand))
                    cents = vnf_cents[req.sfs[j - 1], name]
                y_index[m, j, name] = lp.add_variable(f"y[{m},{j},{name}]", lo, hi, cents)
    for m in net.node_ids:
        for j in range(k + 2):
            z_index[m, j] = lp.add_variable(f"z[{m},{j}]", 0.0, float(b))
    for j in range(k + 1):
        for link in net.links:
            for a, c in ((link.a, link.b), (link.b, link.a)):
                x_index[j, (a, c)] = lp.add_variable(f"x[{j},{a},{c}]", 0.0,
                                                     float(link.mbps), beta)

    # node capacity
    for m in net.node_ids:
        for r in net.resource_kinds:
            row = {}
            for j in range(1, k + 1):
                for name, _, demand in _layer_vnfs(req, cat, j):
                    if demand.get(r, 0):
                        row[y_index[m, j, name]] = demand[r]
            if row:
                lp.add_constraint(row, LE, net.capacity(m, r), f"cap[{m},{r}]")
    # location of the pseudo VNFs
    for j, name, home in ((0, SOURCE_VNF, req.source), (k + 1, TARGET_VNF, req.target)):
        lp.add_constraint({y_index[home, j, name]: 1}, EQ, 1.0, f"loc[{name},{home}]")
        others = {y_index[m, j, name]: 1 for m in net.node_ids if m != home}
        if others:
            lp.add_constraint(others, EQ, 0.0, f"loc[{name},others]")
    # link capacity over both directions and all commodities
    for link in net.links:
        row = {}
        for j in range(k + 1):
            row[x_index[j, (link.a, link.b)]] = 1
            row[x_index[j, (link.b, link.a)]] = 1
        lp.add_constraint(row, LE, float(link.mbps), f"link[{link.a},{link.b}]")
    # installed throughput covers the allocation
    for m in net.node_ids:
        for j in range(k + 2):
            row = {y_index[m, j, name]: q for name, q, _ in _layer_vnfs(req, cat, j)}
            row[z_index[m, j]] = -1
            lp.add_constraint(row, GE, 0.0, f"thr[{m},{j}]")
    # demand
    for j in range(k + 2):
        lp.add_constraint({z_index[m, j]: 1 for m in net.node_ids}, EQ, float(b), f"dem[{j}]")
    # flow conservation with local processing
    for m in net.node_ids:
        for j in range(k + 1):
            row = {}
            for n in net.neighbors(m):
                row[x_index[j, (m, n)]] = row.get(x_index[j, (m, n)], 0) + 1
                row[x_index[j, (n, m)]] = row.get(x_index[j, (n, m)], 0) - 1
            row[z_index[m, j]] = -1
            row[z_index[m, j + 1]] = 1
            lp.add_constraint(row, EQ, 0.0, f"cons[{m},{j}]")
    if cover_rows:
        for j in range(1, k + 1):
            sf = req.sfs[j - 1]
            floor_cents = cover_cost(b, [(v.mbps, vnf_cents[sf, v.name]) for v in cat[sf]])
            if floor_cents > 0:
                row = {y_index[m, j, v.name]: vnf_cents[sf, v.name]
                       for m in net.node_ids for v in cat[sf] if vnf_cents[sf, v.name]}
                lp.add_constraint(row, GE, float(floor_cents), f"cover[{j}]")

    return MilpProblem(lp, frozenset(y_index.values()), y_index, z_index, x_index, gamma,
                       net, req, cat, cost)


def _is_integral(v: float) -> bool:
    return abs(v - round(v)) <= INT_TOL


def extract_deployment(p: MilpProblem, values) -> Deployment:
    """Map a solution vector back to ``(X, Y, Z)``.

    Integer variables must be integral within 1e-6.  Continuous flows and
    allocations are rounded when all are near-integral; otherwise the flows
    are recomputed as an integer problem on the fixed instance counts.
    """
    values = np.asarray(values, dtype=float)
    for i in p.integer:
        if not _is_integral(values[i]):
            raise ExtractionError(f"{p.lp.variables[i].name} = {values[i]} is fractional")
    k = p.req.length
    continuous = list(p.z_index.values()) + list(p.x_index.values())
    if not all(_is_integral(values[i]) for i in continuous):
        values = _integral_flows(p, values)
        if values is None:
            raise ExtractionError("no integral flow exists for the chosen instances")
    instances = {}
    for (m, j, name), i in p.y_index.items():
        if 1 <= j <= k and round(values[i]):
            instances[m, j, name] = int(round(values[i]))
    allocations = {(m, j): int(round(values[i])) for (m, j), i in p.z_index.items()
                   if 1 <= j <= k}
    flows = {key: int(round(values[i])) for key, i in p.x_index.items()}
    return Deployment(flows, instances, allocations)


def _integral_flows(p: MilpProblem, values):
    """Re-solve with instance counts fixed and every variable integral."""
    lp = p.lp.copy()
    for i in p.integer:
        lp.variables[i].lb = lp.variables[i].ub = float(round(values[i]))
    sub = MilpProblem(lp, frozenset(range(lp.n_vars)), p.y_index, p.z_index, p.x_index,
                      p.gamma, p.net, p.req, p.cat, p.cost)
    best = _branch_and_bound(sub, SolveLimits())
    return best[1]


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    lb: np.ndarray = field(compare=False)
    ub: np.ndarray = field(compare=False)
    x: np.ndarray = field(compare=False)


def _branch_var(x, integer_idx):
    frac = x[integer_idx] - np.floor(x[integer_idx])
    dist = np.abs(frac - 0.5)
    candidates = np.nonzero(np.minimum(frac, 1 - frac) > INT_TOL)[0]
    if len(candidates) == 0:
        return None
    # most fractional; argmin returns the lowest index among ties
    best = candidates[np.argmin(dist[candidates])]
    return int(integer_idx[best])


def _branch_and_bound(p: MilpProblem, lim: SolveLimits):
    """Returns ``(status, incumbent_x, incumbent_obj, bound, nodes)``."""
    c, A, senses, b, lb0, ub0 = p.lp.dense()
    integer_idx = np.array(sorted(p.integer), dtype=int)
    start = time.perf_counter()
    root = simplex(c, A, senses, b, lb0, ub0)
    if root.status == UNBOUNDED:
        raise ValueError("relaxation is unbounded")
    if root.status != OPTIMAL:
        return INFEASIBLE_STATUS, None, None, None, 1
    heap = [_Node(root.objective, 0, lb0, ub0, root.x)]
    seq = 1
    nodes = 1
    best_x, best_obj = None, INF
    exhausted = False

    while heap:
        node = heap[0]
        if best_x is not None and node.bound >= best_obj - lim.gap * max(1.0, abs(best_obj)):
            heap.clear()
            break
        if nodes >= lim.node_limit or time.perf_counter() - start > lim.time_limit:
            exhausted = True
            break
        heapq.heappop(heap)
        j = _branch_var(node.x, integer_idx) if len(integer_idx) else None
        if j is None:
            if node.bound < best_obj:
                best_x, best_obj = node.x, node.bound
            continue
        v = node.x[j]
        for side in ("down", "up"):
            lb, ub = node.lb.copy(), node.ub.copy()
            if side == "down":
                ub[j] = math.floor(v)
            else:
                lb[j] = math.ceil(v)
            if lb[j] > ub[j]:
                continue
            sol = simplex(c, A, senses, b, lb, ub)
            nodes += 1
            if sol.status != OPTIMAL:
                continue
            if best_x is not None and sol.objective >= best_obj - lim.gap * max(1.0, abs(best_obj)):
                continue
            heapq.heappush(heap, _Node(sol.objective, seq, lb, ub, sol.x))
            seq += 1

    if exhausted:
        bound = min([n.bound for n in heap] + ([best_obj] if best_x is not None else []))
        status = FEASIBLE_WITH_GAP if best_x is not None else BUDGET_EXHAUSTED
        return status, best_x, (best_obj if best_x is not None else None), bound, nodes
    if best_x is None:
        return INFEASIBLE_STATUS, None, None, None, nodes
    return OPTIMAL_STATUS, best_x, best_obj, best_obj, nodes


def solve_milp(p: MilpProblem, lim: SolveLimits = SolveLimits(), engine: str = "bnb") -> ExactResult:
    """Solve the placement MILP.

    ``engine="bnb"`` is the in-repo branch-and-bound over the dense simplex;
    ``engine="highs"`` hands the same model to SciPy's HiGHS interface for
    larger substrates.  Objectives are in cents.
    """
    if engine == "bnb":
        status, x, obj, bound, nodes = _branch_and_bound(p, lim)
    elif engine == "highs":
        status, x, obj, bound, nodes = _solve_highs(p, lim)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    if x is None:
        reason = {INFEASIBLE_STATUS: "infeasible", BUDGET_EXHAUSTED: "solver budget exhausted"}
        return ExactResult(status, None, None, bound, nodes, reason=reason.get(status, status))
    dep = extract_deployment(p, x)
    costs = total_cost(dep, p.cost, p.req, p.cat)
    return ExactResult(status, dep, obj, bound, nodes, costs)


def relaxation_bound(p: MilpProblem) -> Optional[float]:
    """Objective of the LP relaxation, or ``None`` when it is infeasible."""
    sol = simplex(*p.lp.dense())
    return sol.objective if sol.status == OPTIMAL else None


def _solve_highs(p: MilpProblem, lim: SolveLimits):
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import lil_matrix

    lp = p.lp
    n = lp.n_vars
    A = lil_matrix((len(lp.constraints), n))
    lo = np.empty(len(lp.constraints))
    hi = np.empty(len(lp.constraints))
    for r, con in enumerate(lp.constraints):
        for j, a in con.coeffs.items():
            A[r, j] = a
        lo[r] = con.rhs if con.sense in (EQ, GE) else -INF
        hi[r] = con.rhs if con.sense in (EQ, LE) else INF
    integrality = np.zeros(n)
    integrality[list(p.integer)] = 1
    bounds = Bounds([v.lb for v in lp.variables], [v.ub for v in lp.variables])
    res = milp(np.asarray(lp.objective, dtype=float), integrality=integrality, bounds=bounds,
               constraints=LinearConstraint(A.tocsr(), lo, hi),
               options={"time_limit": lim.time_limit, "node_limit": lim.node_limit,
                        "mip_rel_gap": lim.gap, "presolve": True})
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    bound = getattr(res, "mip_dual_bound", None)
    if res.status == 0:
        return OPTIMAL_STATUS, res.x, float(res.fun), bound, nodes
    if res.status == 2:
        return INFEASIBLE_STATUS, None, None, None, nodes
    if res.x is not None:
        return FEASIBLE_WITH_GAP, res.x, float(res.fun), bound, nodes
    return BUDGET_EXHAUSTED, None, None, bound, nodes
