"""Freeze brute-force optima for the exact-solver checks.

For every instance the optimum is found by enumerating instance counts:
per host, all count vectors that fit the node are reduced to the
Pareto-minimal (host cost, per-layer capacity) pairs; host combinations are
walked depth-first and, for each one that covers the demand in every layer,
the remaining flow problem is solved as an LP with SciPy's HiGHS.  A
combination is skipped when its host cost plus ``beta * b * dist(s, t)``
cannot beat the incumbent.  Nothing from ``sfcplace.linprog`` is used.

Run from the repository root:  python3 tests/data/build_oracle.py
"""

from __future__ import annotations

import itertools
import json
import sys
from collections import deque
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from sfcplace import io
from sfcplace.datasets import worked_example
from sfcplace.model import DEFAULT_COST
from sfcplace.simlab.instances import random_small_instance

HERE = Path(__file__).parent
N_RANDOM = 50


def host_options(net, req, cat, cost, m):
    """Pareto-minimal (cents, caps per layer, counts) for node ``m``."""
    k = req.length
    types = [(j, v) for j in range(1, k + 1) for v in cat[req.sfs[j - 1]]]
    cap = {r: net.capacity(m, r) for r in net.resource_kinds}
    bounds = []
    for _, v in types:
        bounds.append(min(int(cap.get(r, 0) // d + 1e-9) for r, d in v.demand.items() if d > 0))
    best = {}
    for counts in itertools.product(*(range(b + 1) for b in bounds)):
        used = {r: sum(c * v.demand.get(r, 0) for c, (_, v) in zip(counts, types)) for r in cap}
        if any(used[r] > cap[r] + 1e-9 for r in cap):
            continue
        cents = sum(c * cost.host_cents(v) for c, (_, v) in zip(counts, types))
        caps = tuple(min(req.mbps, sum(c * v.mbps for c, (jj, v) in zip(counts, types) if jj == j))
                     for j in range(1, k + 1))
        key = (cents, caps)
        if key not in best:
            best[key] = counts
    items = sorted(best.items())
    pareto = []
    for (cents, caps), counts in items:
        dominated = any(c2 <= cents and all(a >= b for a, b in zip(cp2, caps)) and (c2, cp2) != (cents, caps)
                        for (c2, cp2), _ in items)
        if not dominated:
            pareto.append((cents, caps, counts))
    return pareto


def flow_lp(net, req, caps, beta):
    """Cheapest bandwidth given per-node, per-layer capacities; None if infeasible."""
    k = req.length
    nodes = net.node_ids
    arcs = net.directed_arcs()
    nx = len(arcs) * (k + 1)
    nz = len(nodes) * k

    def xi(j, a):
        return j * len(arcs) + a

    def zi(m, j):
        return nx + nodes.index(m) * k + (j - 1)

    nvar = nx + nz
    c = np.zeros(nvar)
    c[:nx] = beta
    bounds = [(0, None)] * nx + [(0, caps[m][j - 1]) for m in nodes for j in range(1, k + 1)]
    A_eq, b_eq, A_ub, b_ub = [], [], [], []
    for j in range(1, k + 1):
        row = np.zeros(nvar)
        for m in nodes:
            row[zi(m, j)] = 1
        A_eq.append(row)
        b_eq.append(req.mbps)
    for m in nodes:
        for j in range(k + 1):
            row = np.zeros(nvar)
            for a, (p, q) in enumerate(arcs):
                if p == m:
                    row[xi(j, a)] += 1
                if q == m:
                    row[xi(j, a)] -= 1
            rhs = 0.0
            if j == 0:
                rhs += req.mbps if m == req.source else 0
            else:
                row[zi(m, j)] -= 1
            if j == k:
                rhs -= req.mbps if m == req.target else 0
            else:
                row[zi(m, j + 1)] += 1
            A_eq.append(row)
            b_eq.append(rhs)
    for i, link in enumerate(net.links):
        row = np.zeros(nvar)
        for j in range(k + 1):
            row[xi(j, 2 * i)] = 1
            row[xi(j, 2 * i + 1)] = 1
        A_ub.append(row)
        b_ub.append(link.mbps)
    res = linprog(c, A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
                  A_eq=np.array(A_eq), b_eq=b_eq, bounds=bounds, method="highs")
    if res.status == 2:
        return None
    assert res.status == 0, res.message
    return float(res.fun)


def hops(net, a, b):
    dist = {a: 0}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        for v in net.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist.get(b)


def brute_force(net, req, cat, cost):
    k = req.length
    beta = cost.beta_cents
    d = hops(net, req.source, req.target)
    if d is None:
        return "infeasible", None, 0
    bw_floor = beta * req.mbps * d
    hosts = [m for m in net.node_ids if any(net.capacity(m, r) > 0 for r in net.resource_kinds)]
    options = [host_options(net, req, cat, cost, m) for m in hosts]
    # best capacity still available from hosts i.. for pruning
    suffix = [[0] * k for _ in range(len(hosts) + 1)]
    for i in range(len(hosts) - 1, -1, -1):
        top = [max(o[1][j] for o in options[i]) for j in range(k)]
        suffix[i] = [suffix[i + 1][j] + top[j] for j in range(k)]
    best = [float("inf")]
    solved = [0]

    def rec(i, cents, caps, chosen):
        if cents + bw_floor >= best[0] - 1e-9:
            return
        if any(caps[j] + suffix[i][j] < req.mbps for j in range(k)):
            return
        if i == len(hosts):
            node_caps = {m: [0] * k for m in net.node_ids}
            for m, opt in zip(hosts, chosen):
                node_caps[m] = list(opt[1])
            bw = flow_lp(net, req, node_caps, beta)
            solved[0] += 1
            if bw is not None and cents + bw < best[0]:
                best[0] = cents + bw
            return
        for opt in options[i]:
            rec(i + 1, cents + opt[0], [a + b for a, b in zip(caps, opt[1])], chosen + [opt])

    rec(0, 0, [0] * k, [])
    if best[0] == float("inf"):
        return "infeasible", None, solved[0]
    return "optimal", best[0], solved[0]


def instance_record(label, net, cat, req, cost):
    status, objective, lps = brute_force(net, req, cat, cost)
    print(f"{label}: {status} {objective} ({lps} flow LPs)", file=sys.stderr)
    return {"label": label, "network": io.network_to_dict(net), "catalog": io.catalog_to_dict(cat),
            "request": io.request_to_dict(req),
            "cost": {"alpha": dict(cost.alpha), "beta": float(cost.beta)},
            "status": status, "objective_cents": objective}


def main():
    records = []
    net, cat, req, _ = worked_example()
    records.append(instance_record("worked-example", net, cat, req, DEFAULT_COST))
    for seed in range(N_RANDOM):
        inst = random_small_instance(seed)
        records.append(instance_record(f"small-{seed}", inst.net, inst.cat, inst.req, inst.cost))
    (HERE / "oracle_optima.json").write_text(json.dumps(records, indent=1) + "\n")


if __name__ == "__main__":
    main()
