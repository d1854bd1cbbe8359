"""Min-cost flow and the layer-to-layer routing used by the heuristic.

Substrate links are undirected; every link becomes two directed arcs that
share the link's residual bandwidth.  Imaginary nodes use reserved negative
ids so they never collide with substrate node ids.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Mapping, Optional, Sequence

from . import kernels
from .linprog import EQ, LE, OPTIMAL, LinearProgram, solve_lp
from .model import SubstrateNetwork

SUPER_SOURCE = -1
SUPER_SINK = -2
POOL = -3

LP_REROUTE_MAX_VARS = 120


@dataclass(frozen=True)
class Arc:
    tail: Hashable
    head: Hashable
    capacity: int
    cost: int


@dataclass(frozen=True)
class FlowNetwork:
    arcs: tuple[Arc, ...]

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))
        for a in self.arcs:
            if a.capacity < 0 or a.cost < 0:
                raise ValueError(f"arc {a.tail}->{a.head}: capacity and cost must be >= 0")

    def nodes(self) -> list:
        seen = {}
        for a in self.arcs:
            seen.setdefault(a.tail, None)
            seen.setdefault(a.head, None)
        return list(seen)


@dataclass(frozen=True)
class FlowResult:
    flows: tuple[int, ...]
    cost: int
    routed: int


class InfeasibleFlowError(Exception):
    def __init__(self, max_flow: int, result: FlowResult):
        super().__init__(f"only {max_flow} units can be routed")
        self.max_flow = max_flow
        self.result = result


def min_cost_flow(net: FlowNetwork, source, sink, amount: int) -> FlowResult:
    """Cheapest flow of exactly ``amount`` from ``source`` to ``sink``.

    Raises :class:`InfeasibleFlowError` carrying the maximum flow when
    ``amount`` cannot be routed.
    """
    if amount < 0:
        raise ValueError("amount must be non-negative")
    nodes = net.nodes()
    for end in (source, sink):
        if end not in nodes:
            nodes.append(end)
    index = {v: i for i, v in enumerate(nodes)}
    tails = [index[a.tail] for a in net.arcs]
    heads = [index[a.head] for a in net.arcs]
    caps = [int(a.capacity) for a in net.arcs]
    costs = [int(a.cost) for a in net.arcs]
    flows, routed, total = kernels.ssp_min_cost_flow(
        len(nodes), tails, heads, caps, costs, index[source], index[sink], int(amount))
    result = FlowResult(tuple(flows), total, routed)
    if routed < amount:
        raise InfeasibleFlowError(routed, result)
    return result


def _ordered(net: SubstrateNetwork, nodes) -> list:
    return sorted(nodes, key=net.index)


def _substrate_arcs(net: SubstrateNetwork, link_residual: Sequence[int], beta: int) -> list[Arc]:
    arcs = []
    for i, link in enumerate(net.links):
        cap = int(link_residual[i])
        arcs.append(Arc(link.a, link.b, cap, beta))
        arcs.append(Arc(link.b, link.a, cap, beta))
    return arcs


def _net_flows(net: SubstrateNetwork, flows: Sequence[int], offset: int) -> dict:
    """Directed substrate flows with opposite directions cancelled."""
    out = {}
    for i, link in enumerate(net.links):
        fwd = flows[offset + 2 * i]
        bwd = flows[offset + 2 * i + 1]
        common = min(fwd, bwd)
        if fwd - common:
            out[link.a, link.b] = fwd - common
        if bwd - common:
            out[link.b, link.a] = bwd - common
    return out


def link_usage(net: SubstrateNetwork, flows: Mapping) -> list[int]:
    usage = [0] * len(net.links)
    for (m, n), x in flows.items():
        usage[net.link_index(m, n)] += x
    return usage


def flow_cost(flows: Mapping, beta: int) -> int:
    return beta * sum(flows.values())


@dataclass(frozen=True)
class LayerRoute:
    flows: dict
    allocations: dict
    cost: int


class RoutingInfeasible(Exception):
    pass


def _solve_layer(net, link_residual, beta, source_side, sink_side, amount) -> tuple[dict, dict, list]:
    """Route ``amount`` between super terminals.

    ``source_side``/``sink_side`` are ``(exact, pooled, pool_cap)``: nodes in
    ``exact`` connect to the terminal directly; nodes in ``pooled`` connect
    through one shared pool arc of capacity ``pool_cap``.  When the terminal
    arcs sum to ``amount``, every one of them is saturated.
    """
    arcs = []
    src_exact, src_pool, src_pool_cap = source_side
    for m in _ordered(net, src_exact):
        arcs.append(Arc(SUPER_SOURCE, m, int(src_exact[m]), 0))
    if src_pool:
        arcs.append(Arc(SUPER_SOURCE, POOL, int(src_pool_cap), 0))
        for m in _ordered(net, src_pool):
            arcs.append(Arc(POOL, m, int(src_pool[m]), 0))
    offset = len(arcs)
    arcs.extend(_substrate_arcs(net, link_residual, beta))
    sink_arcs = []
    snk_exact, snk_pool, snk_pool_cap = sink_side
    for n in _ordered(net, snk_exact):
        sink_arcs.append((n, len(arcs)))
        arcs.append(Arc(n, SUPER_SINK, int(snk_exact[n]), 0))
    if snk_pool:
        for n in _ordered(net, snk_pool):
            sink_arcs.append((n, len(arcs)))
            arcs.append(Arc(n, POOL - 1, int(snk_pool[n]), 0))
        arcs.append(Arc(POOL - 1, SUPER_SINK, int(snk_pool_cap), 0))
    src_arcs = [(a.head, i) for i, a in enumerate(arcs[:offset]) if a.head != POOL]
    try:
        result = min_cost_flow(FlowNetwork(arcs), SUPER_SOURCE, SUPER_SINK, amount)
    except InfeasibleFlowError as exc:
        raise RoutingInfeasible(f"max flow {exc.max_flow} < {amount}") from None
    flows = _net_flows(net, result.flows, offset)
    sinks = {n: result.flows[i] for n, i in sink_arcs if result.flows[i]}
    sources = {m: result.flows[i] for m, i in src_arcs if result.flows[i]}
    return flows, sinks, sources


def route_between_layers(net: SubstrateNetwork, link_residual: Sequence[int], beta: int,
                         sources: Mapping[str, int], sinks: Mapping[str, int],
                         amount: int) -> LayerRoute:
    """Cheapest routing of ``amount`` from a source layer into a sink layer.

    ``sources`` maps source-layer nodes to the traffic they emit (summing to
    ``amount``); ``sinks`` maps sink-layer nodes to the most they can absorb.
    Returns the substrate flows and the resulting sink allocations.
    """
    if not sinks or not any(sinks.values()):
        raise RoutingInfeasible("sink layer is empty")
    flows, alloc, _ = _solve_layer(net, link_residual, beta, (sources, {}, 0), (sinks, {}, 0), amount)
    return LayerRoute(flows, alloc, flow_cost(flows, beta))


@dataclass(frozen=True)
class Reroute:
    incoming: dict
    outgoing: Optional[dict]
    allocations: dict
    cost: int
    method: str


def _residual_after(net, link_residual, flows) -> list[int]:
    used = link_usage(net, flows)
    return [r - u for r, u in zip(link_residual, used)]


def _sequential(net, link_residual, beta, upstream, fixed, flexible, downstream, amount, order):
    pool_cap = amount - sum(fixed.values())
    if order == "in-first":
        fin, alloc, _ = _solve_layer(net, link_residual, beta, (upstream, {}, 0),
                                     (fixed, flexible, pool_cap), amount)
        for n, v in fixed.items():
            alloc.setdefault(n, v)
        if downstream is None:
            return fin, None, alloc
        rest = _residual_after(net, link_residual, fin)
        fout, _, _ = _solve_layer(net, rest, beta, (alloc, {}, 0), (downstream, {}, 0), amount)
        return fin, fout, alloc
    fout, _, alloc = _solve_layer(net, link_residual, beta, (fixed, flexible, pool_cap),
                                  (downstream, {}, 0), amount)
    rest = _residual_after(net, link_residual, fout)
    fin, _, _ = _solve_layer(net, rest, beta, (upstream, {}, 0), (alloc, {}, 0), amount)
    return fin, fout, alloc


def _joint_lp(net, link_residual, beta, upstream, fixed, flexible, downstream, amount):
    lp = LinearProgram()
    arcs = net.directed_arcs()
    xin = [lp.add_variable(f"in_{a}_{b}", cost=beta) for a, b in arcs]
    xout = [lp.add_variable(f"out_{a}_{b}", cost=beta) for a, b in arcs]
    zvar = {m: lp.add_variable(f"z_{m}", 0.0, cap) for m, cap in flexible.items()}
    for m in net.node_ids:
        row_in, row_out = defaultdict(float), defaultdict(float)
        for k, (a, b) in enumerate(arcs):
            if a == m:
                row_in[xin[k]] += 1
                row_out[xout[k]] += 1
            elif b == m:
                row_in[xin[k]] -= 1
                row_out[xout[k]] -= 1
        fixed_z = fixed.get(m, 0)
        if m in zvar:
            row_in[zvar[m]] += 1
            row_out[zvar[m]] -= 1
        lp.add_constraint(row_in, EQ, upstream.get(m, 0) - fixed_z)
        lp.add_constraint(row_out, EQ, fixed_z - downstream.get(m, 0))
    for i in range(len(net.links)):
        lp.add_constraint({xin[2 * i]: 1, xin[2 * i + 1]: 1, xout[2 * i]: 1, xout[2 * i + 1]: 1},
                          LE, link_residual[i])
    if zvar:
        lp.add_constraint({v: 1 for v in zvar.values()}, EQ, amount - sum(fixed.values()))
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        return "infeasible"
    x = sol.x
    rounded = [round(v) for v in x]
    if any(abs(v - r) > 1e-6 for v, r in zip(x, rounded)):
        return None
    fin = _net_flows(net, [rounded[i] for i in xin], 0)
    fout = _net_flows(net, [rounded[i] for i in xout], 0)
    alloc = {m: v for m, v in fixed.items() if v}
    for m, i in zvar.items():
        if rounded[i]:
            alloc[m] = rounded[i]
    return fin, fout, alloc


def reroute_commodities(net: SubstrateNetwork, link_residual: Sequence[int], beta: int,
                        upstream: Mapping[str, int], fixed: Mapping[str, int],
                        flexible: Mapping[str, int], downstream: Optional[Mapping[str, int]],
                        amount: int, lp_max_vars: int = LP_REROUTE_MAX_VARS) -> Reroute:
    """Re-route the traffic entering and leaving one layer.

    Nodes in ``fixed`` must process exactly their value; nodes in ``flexible``
    may process anything up to their value; together they process ``amount``.
    ``upstream``/``downstream`` are the fixed allocations of the neighbouring
    layers (``downstream=None`` when the layer's output is not routed yet).
    ``link_residual`` must exclude the two commodities being re-routed.

    Small two-commodity subproblems are solved as one LP and used when the
    optimum is integral; otherwise both sequential orders are tried and the
    cheaper kept.  Raises :class:`RoutingInfeasible` when nothing works.
    """
    if sum(fixed.values()) > amount or sum(fixed.values()) + sum(flexible.values()) < amount:
        raise RoutingInfeasible("layer cannot process the demand")
    if downstream is not None and 4 * len(net.links) + len(flexible) <= lp_max_vars:
        found = _joint_lp(net, link_residual, beta, upstream, fixed, flexible, downstream, amount)
        if found == "infeasible":
            raise RoutingInfeasible("joint routing LP infeasible")
        if found is not None:
            fin, fout, alloc = found
            return Reroute(fin, fout, alloc, flow_cost(fin, beta) + flow_cost(fout, beta), "lp")

    best = None
    orders = ("in-first",) if downstream is None else ("in-first", "out-first")
    for order in orders:
        try:
            fin, fout, alloc = _sequential(net, link_residual, beta, upstream, fixed, flexible,
                                           downstream, amount, order)
        except RoutingInfeasible:
            continue
        cost = flow_cost(fin, beta) + (flow_cost(fout, beta) if fout is not None else 0)
        if best is None or cost < best.cost:
            best = Reroute(fin, fout, {m: v for m, v in alloc.items() if v}, cost, order)
    if best is None:
        raise RoutingInfeasible("no feasible rerouting")
    return best
