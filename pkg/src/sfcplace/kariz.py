"""Layer-by-layer local-search placement.

A chain with SFs ``1..k`` is seen as layers ``0..k+1``: layer 0 holds only
the source, layer ``k+1`` only the target, and layer ``j`` the nodes that may
host instances of SF ``j``.  Traffic is routed from one layer into the next
with a min-cost flow; after each step a round of add/open actions tries to
lower the total cost, and the layers are pruned.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .flow import RoutingInfeasible, flow_cost, reroute_commodities, route_between_layers
from .model import (ChainRequest, CostModel, Costs, Deployment, SubstrateNetwork, VnfCatalog,
                    total_cost, validate_inputs)
from .packing import EMPTY, PackingResult, max_throughput, min_cost_instances

DEFAULT_EPSILON = 20

# when set to a list, every improve() trace is appended to it (audit hook)
TRACE_SINK: Optional[list] = None


@dataclass(frozen=True)
class Patch:
    """Replacement data for one layer and its two adjacent commodities."""
    layer: int
    incoming: dict
    outgoing: Optional[dict]
    allocations: dict
    instances: dict


@dataclass(frozen=True)
class Action:
    kind: str
    node: str
    layer: int
    delta: int
    removed: tuple = ()
    cost: int = 0
    patch: Optional[Patch] = field(default=None, compare=False)


@dataclass
class ImproveTrace:
    start_cost: int
    final_cost: int
    theta: Fraction
    steps: list = field(default_factory=list)  # (pre-action cost, cost delta)

    def within_bound(self) -> bool:
        """Action count against ``ln(C0/Cf) / -ln(1 - theta) + 1``."""
        n = len(self.steps)
        if n == 0:
            return True
        if self.final_cost <= 0 or self.theta >= 1:
            return True
        limit = math.log(self.start_cost / self.final_cost) / -math.log(1 - float(self.theta))
        return n <= limit + 1 + 1e-9

    def steps_sufficient(self) -> bool:
        return all(-d >= self.theta * pre for pre, d in self.steps)


@dataclass
class KarizResult:
    accepted: bool
    deployment: Optional[Deployment] = None
    costs: Optional[Costs] = None
    reason: str = ""
    traces: list = field(default_factory=list)


class LayerState:
    """Partial solution of one request plus the bookkeeping the actions need."""

    def __init__(self, net: SubstrateNetwork, req: ChainRequest, cat: VnfCatalog,
                 cost: CostModel, packing_objective: str = "cost"):
        self.net, self.req, self.cat, self.cost = net, req, cat, cost
        self.objective = packing_objective
        self.k = req.length
        self.b = req.mbps
        self.beta = cost.beta_cents
        self.order = {n: i for i, n in enumerate(net.node_ids)}
        k = self.k
        self.z: list[dict] = [dict() for _ in range(k + 2)]
        self.z[0] = {req.source: self.b}
        self.z[k + 1] = {req.target: self.b}
        self.instances: list[dict] = [dict() for _ in range(k + 2)]
        self.flows: list[Optional[dict]] = [None] * (k + 1)
        self.cursor = 0
        self.layers: list[list] = [[] for _ in range(k + 2)]
        self.layers[0] = [req.source]
        self.layers[k + 1] = [req.target]
        for j in range(1, k + 1):
            self.layers[j] = [n for n in net.node_ids if self.max_throughput(n, j) > 0]
        self._dist = None

    # -- resources -------------------------------------------------------
    def candidates(self, j: int):
        return self.cat[self.req.sfs[j - 1]]

    def node_residual(self, n: str, skip_layer: Optional[int] = None) -> dict:
        res = {r: self.net.capacity(n, r) for r in self.net.resource_kinds}
        for j in range(1, self.k + 1):
            if j == skip_layer:
                continue
            packing = self.instances[j].get(n)
            if packing is not None:
                for r, used in packing.consumed.items():
                    res[r] = res.get(r, 0) - used
        return {r: max(0.0, v) for r, v in res.items()}

    def max_throughput(self, n: str, j: int) -> int:
        return max_throughput(self.node_residual(n, j), self.candidates(j), self.cost,
                              self.objective).achieved

    def pack(self, n: str, j: int, mbps: int) -> Optional[PackingResult]:
        return min_cost_instances(self.node_residual(n, j), mbps, self.candidates(j), self.cost,
                                  self.objective)

    def link_residual(self, skip=()) -> list[int]:
        res = [l.mbps for l in self.net.links]
        for c, flows in enumerate(self.flows):
            if flows is None or c in skip:
                continue
            for (m, n), x in flows.items():
                res[self.net.link_index(m, n)] -= x
        return res

    # -- costs -----------------------------------------------------------
    def bandwidth_cost(self, c: int) -> int:
        flows = self.flows[c]
        return 0 if flows is None else flow_cost(flows, self.beta)

    def host_cost(self, j: int) -> int:
        return sum(p.host_cost for p in self.instances[j].values())

    def total(self) -> int:
        return (sum(self.bandwidth_cost(c) for c in range(self.k + 1))
                + sum(self.host_cost(j) for j in range(1, self.k + 1)))

    def hop_distance(self, a: str, b: str) -> int:
        if self._dist is None:
            self._dist = {}
        if a not in self._dist:
            dist = {a: 0}
            queue = deque([a])
            while queue:
                u = queue.popleft()
                for v in self.net.neighbors(u):
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        queue.append(v)
            self._dist[a] = dist
        return self._dist[a].get(b, math.inf)

    # -- views -----------------------------------------------------------
    def deployment(self) -> Deployment:
        flows, instances, allocations = {}, {}, {}
        for c, fl in enumerate(self.flows):
            for arc, x in (fl or {}).items():
                flows[c, arc] = x
        for j in range(1, self.k + 1):
            for n, packing in self.instances[j].items():
                for name, count in packing.counts.items():
                    instances[n, j, name] = count
            for n, z in self.z[j].items():
                allocations[n, j] = z
        return Deployment(flows, instances, allocations)

    def downstream(self, j: int) -> Optional[dict]:
        """Allocations of layer ``j+1`` if traffic already reaches it."""
        return self.z[j + 1] if j + 1 <= self.cursor else None

    def apply(self, patch: Patch) -> None:
        j = patch.layer
        self.flows[j - 1] = dict(patch.incoming)
        if patch.outgoing is not None:
            self.flows[j] = dict(patch.outgoing)
        self.z[j] = dict(patch.allocations)
        self.instances[j] = dict(patch.instances)

    def patch_cost_delta(self, patch: Patch) -> int:
        j = patch.layer
        old = self.bandwidth_cost(j - 1) + self.host_cost(j)
        new = flow_cost(patch.incoming, self.beta)
        new += sum(p.host_cost for p in patch.instances.values())
        if patch.outgoing is not None:
            old += self.bandwidth_cost(j)
            new += flow_cost(patch.outgoing, self.beta)
        return new - old


# -- actions ---------------------------------------------------------------

def action_cost(state: LayerState, action: Action) -> int:
    """Total-cost difference (cents) of performing ``action``; negative improves."""
    if action.patch is None:
        return 0
    return state.patch_cost_delta(action.patch)


def admissible(state: LayerState, action: Optional[Action], epsilon) -> bool:
    """True iff the action lowers the cost by at least ``epsilon / (4|N|)`` of it."""
    if action is None:
        return False
    delta = action_cost(state, action)
    if delta >= 0:
        return False
    current = state.total()
    return Fraction(-delta) * 4 * len(state.net.nodes) >= Fraction(epsilon) * current


def _cutoff(state: LayerState, epsilon) -> int:
    """Largest cost delta (integer cents) an admissible action may have."""
    current = state.total()
    limit = -Fraction(epsilon) * current / (4 * len(state.net.nodes))
    return min(-1, math.floor(limit))


@lru_cache(maxsize=4096)
def _cover(mbps: int, types: tuple) -> int:
    if mbps <= 0:
        return 0
    best = [0] + [math.inf] * mbps
    for t in range(1, mbps + 1):
        for q, cents in types:
            best[t] = min(best[t], best[max(0, t - q)] + cents)
    return best[mbps]


class _Evaluator:
    """Scores actions of one layer against a frozen snapshot of the state."""

    def __init__(self, state: LayerState, j: int):
        self.s = state
        self.j = j
        self.upstream = state.z[j - 1]
        self.down = state.downstream(j)
        skip = (j - 1, j) if self.down is not None else (j - 1,)
        self.link_res = state.link_residual(skip)
        self.z = state.z[j]
        self.old_bw = state.bandwidth_cost(j - 1) + (state.bandwidth_cost(j) if self.down is not None else 0)
        self.old_host = state.host_cost(j)
        self.types = tuple((v.mbps, state.cost.host_cents(v)) for v in state.candidates(j))
        self.repack = {}

    def pack(self, n: str, mbps: int) -> Optional[PackingResult]:
        if mbps == 0:
            return EMPTY
        current = self.s.instances[self.j].get(n)
        if current is not None and self.z.get(n) == mbps:
            return current
        key = (n, mbps)
        if key not in self.repack:
            self.repack[key] = self.s.pack(n, self.j, mbps)
        return self.repack[key]

    def lower_bound(self, n: str, new_zn: int) -> float:
        """Valid lower bound on the cost delta of giving ``n`` exactly ``new_zn``."""
        s = self.s
        packing = self.pack(n, new_zn)
        if packing is None:
            return math.inf
        host = packing.host_cost + _cover(s.b - new_zn, self.types)
        bw = 0
        remote_in = new_zn - self.upstream.get(n, 0)
        if remote_in > 0:
            bw += remote_in * min((s.hop_distance(u, n) for u in self.upstream if u != n),
                                  default=math.inf)
        if self.down is not None:
            remote_out = new_zn - self.down.get(n, 0)
            if remote_out > 0:
                bw += remote_out * min((s.hop_distance(n, w) for w in self.down if w != n),
                                       default=math.inf)
        if s.beta:
            host += s.beta * bw
        elif bw == math.inf:
            return math.inf
        return host - self.old_host - self.old_bw

    def evaluate(self, n: str, new_zn: int, removed=()) -> Optional[tuple[int, Patch]]:
        s = self.s
        fixed = {n: new_zn}
        flexible = {m: z for m, z in self.z.items() if m != n and m not in removed}
        try:
            rr = reroute_commodities(s.net, self.link_res, s.beta, self.upstream, fixed,
                                     flexible, self.down, s.b)
        except RoutingInfeasible:
            return None
        instances = {}
        for m, z in rr.allocations.items():
            packing = self.pack(m, z)
            if packing is None:
                return None
            instances[m] = packing
        patch = Patch(self.j, rr.incoming, rr.outgoing, rr.allocations, instances)
        return s.patch_cost_delta(patch), patch

    def deltas(self, n: str) -> list[int]:
        """Candidate throughput increments at ``n``: VNF throughputs, packing
        increments, other nodes' allocations and the remaining demand."""
        s = self.s
        zn = self.z.get(n, 0)
        top = min(s.b - zn, s.max_throughput(n, self.j) - zn)
        if top <= 0:
            return []
        candidates = s.candidates(self.j)
        values = {v.mbps for v in candidates}
        residual = s.node_residual(n, self.j)
        values.update(p - zn for p in _achievable(tuple(sorted(residual.items())),
                                                  tuple(candidates), s.b))
        values.update(z for m, z in self.z.items() if m != n)
        values.add(s.b - zn)
        return sorted(d for d in values if 0 < d <= top)


@lru_cache(maxsize=1 << 14)
def _achievable(residual: tuple, candidates: tuple, limit: int) -> frozenset:
    """Distinct throughputs of feasible packings, enumerated up to the first value >= ``limit``."""
    res = dict(residual)
    out = set()

    def rec(u, used, achieved):
        if u == len(candidates):
            out.add(achieved)
            return
        v = candidates[u]
        cur = used
        while True:
            rec(u + 1, cur, achieved)
            if achieved >= limit or not any(v.demand.get(r, 0) for r in res):
                break
            cur = {r: cur[r] + v.demand.get(r, 0) for r in res}
            if any(cur[r] > res[r] + 1e-9 for r in res):
                break
            achieved += v.mbps

    rec(0, {r: 0.0 for r in res}, 0)
    return frozenset(out)


def propose_best_action(state: LayerState, cutoff: int = -1, prune: bool = True) -> Optional[Action]:
    """Cheapest add/open action with cost delta ``<= cutoff`` (default: any improvement).

    With ``prune`` candidates whose lower bound already exceeds the best
    delta found (or the cutoff) are skipped without rerouting.
    """
    reached = min(state.cursor, state.k)
    best: Optional[Action] = None

    def better(action):
        if best is None:
            return True
        return _key(action, state) < _key(best, state)

    for j in range(1, reached + 1):
        ev = _Evaluator(state, j)
        for n in state.net.node_ids:
            for d in ev.deltas(n):
                new_zn = ev.z.get(n, 0) + d
                limit = cutoff if best is None else min(cutoff, best.cost)
                if prune and ev.lower_bound(n, new_zn) > limit:
                    continue
                found = ev.evaluate(n, new_zn)
                if found is not None and found[0] <= cutoff:
                    act = Action("add", n, j, d, (), found[0], found[1])
                    if better(act):
                        best = act
                opened = _greedy_open(ev, n, d, found)
                if opened is not None and opened.cost <= cutoff and better(opened):
                    best = opened
    return best


def _key(action: Action, state: LayerState):
    return (action.cost, 0 if action.kind == "add" else 1, state.order[action.node],
            action.delta, action.layer, tuple(state.order[m] for m in action.removed))


def _greedy_open(ev: _Evaluator, n: str, d: int, base) -> Optional[Action]:
    """Grow the removed set one node at a time while the cost keeps dropping."""
    s = ev.s
    removed: list = []
    current = base[0] if base is not None else math.inf
    patch = None
    new_zn = ev.z.get(n, 0) + d
    while True:
        budget = d - sum(ev.z[m] for m in removed)
        pick = None
        for m in s.net.node_ids:
            if m == n or m not in ev.z or m in removed or ev.z[m] > budget:
                continue
            found = ev.evaluate(n, new_zn, tuple(removed) + (m,))
            if found is not None and (pick is None or found[0] < pick[1]):
                pick = (m, found[0], found[1])
        if pick is None or pick[1] >= current:
            break
        removed.append(pick[0])
        current, patch = pick[1], pick[2]
    if not removed:
        return None
    return Action("open", n, ev.j, d, tuple(removed), current, patch)


def improve(state: LayerState, epsilon=DEFAULT_EPSILON, prune: bool = True) -> ImproveTrace:
    """Apply best admissible actions until none is left."""
    theta = Fraction(epsilon) / (4 * len(state.net.nodes))
    trace = ImproveTrace(state.total(), state.total(), theta)
    while True:
        pre = state.total()
        action = propose_best_action(state, _cutoff(state, epsilon), prune)
        if action is None or not admissible(state, action, epsilon):
            break
        state.apply(action.patch)
        trace.steps.append((pre, state.total() - pre))
    trace.final_cost = state.total()
    if TRACE_SINK is not None:
        TRACE_SINK.append(trace)
    return trace


def update_layers(state: LayerState) -> None:
    """Reached SF layers keep their allocating nodes; later layers drop exhausted nodes."""
    for j in range(1, state.k + 1):
        if j <= state.cursor:
            state.layers[j] = [n for n in state.net.node_ids if state.z[j].get(n, 0) > 0]
        else:
            state.layers[j] = [n for n in state.layers[j] if state.max_throughput(n, j) > 0]


def deploy(net: SubstrateNetwork, req: ChainRequest, cat: VnfCatalog,
           cost: CostModel, epsilon=DEFAULT_EPSILON, packing_objective: str = "cost",
           prune: bool = True) -> KarizResult:
    """Place ``req`` layer by layer; returns the deployment or a rejection reason."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    validate_inputs(net, req, cat)
    state = LayerState(net, req, cat, cost, packing_objective)
    k = state.k
    traces = []
    u = 0
    while True:
        v = u + 1
        if v == k + 1:
            sinks = {req.target: state.b}
        else:
            sinks = {n: state.max_throughput(n, v) for n in state.layers[v]}
            sinks = {n: c for n, c in sinks.items() if c > 0}
        if not sinks:
            return KarizResult(False, reason=f"no node can host {req.layer_name(v)}", traces=traces)
        try:
            routed = route_between_layers(net, state.link_residual(), state.beta, state.z[u],
                                          sinks, state.b)
        except RoutingInfeasible as exc:
            return KarizResult(False, reason=f"routing into {req.layer_name(v)} failed: {exc}",
                               traces=traces)
        state.flows[u] = routed.flows
        if v <= k:
            state.z[v] = dict(routed.allocations)
            for n, z in routed.allocations.items():
                packing = state.pack(n, v, z)
                if packing is None:
                    return KarizResult(False, reason=f"cannot pack {z} Mbps at {n}", traces=traces)
                state.instances[v][n] = packing
        state.cursor = v
        traces.append(improve(state, epsilon, prune))
        update_layers(state)
        u = v
        if u == k + 1:
            break
        if not state.layers[u]:
            return KarizResult(False, reason=f"layer {req.layer_name(u)} is empty", traces=traces)
    dep = state.deployment()
    return KarizResult(True, dep, total_cost(dep, cost, req, cat), traces=traces)
