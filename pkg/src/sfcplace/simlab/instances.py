"""Seeded random small instances for solver cross-checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import ChainRequest, CostModel, Link, Node, SubstrateNetwork, VnfCatalog, VnfType

SMALL_COST = CostModel({"cpu": 1}, 0.01)


@dataclass(frozen=True)
class SmallInstance:
    seed: int
    net: SubstrateNetwork
    cat: VnfCatalog
    req: ChainRequest
    cost: CostModel = SMALL_COST


def random_small_instance(seed: int, max_nodes: int = 8, max_hosts: int = 3,
                          max_sfs: int = 2, max_types: int = 3, max_demand: int = 300) -> SmallInstance:
    """Connected graph of at most ``max_nodes`` nodes, a few compute hosts and a short chain.

    Links carry 50..400 Mbps in steps of 10; hosts have 2..8 cores; VNF types
    have 20..300 Mbps and 1..4 cores; the demand is 10..``max_demand`` Mbps.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, max_nodes + 1))
    names = [f"n{i}" for i in range(n)]
    edges = set()
    for i in range(1, n):
        edges.add((int(rng.integers(0, i)), i))
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        a, b = sorted(int(v) for v in rng.choice(n, 2, replace=False))
        edges.add((a, b))
    links = [Link(names[a], names[b], int(rng.integers(5, 41)) * 10) for a, b in sorted(edges)]

    n_hosts = int(rng.integers(1, min(max_hosts, n) + 1))
    hosts = set(int(v) for v in rng.choice(n, n_hosts, replace=False))
    nodes = [Node(names[i], {"cpu": int(rng.integers(1, 5)) * 2 if i in hosts else 0})
             for i in range(n)]
    net = SubstrateNetwork(nodes, links, ("cpu",))

    k = int(rng.integers(1, max_sfs + 1))
    entries = {}
    for s in range(k):
        n_types = int(rng.integers(1, max_types + 1))
        types = []
        for t in range(n_types):
            types.append(VnfType(f"sf{s}t{t}", int(rng.integers(2, 31)) * 10,
                                 {"cpu": int(rng.integers(1, 5))}))
        entries[f"sf{s}"] = types
    cat = VnfCatalog(entries)
    src, dst = (int(v) for v in rng.choice(n, 2, replace=False))
    demand = int(rng.integers(1, max_demand // 10 + 1)) * 10
    req = ChainRequest(tuple(entries), names[src], names[dst], demand, id=f"small-{seed}")
    return SmallInstance(seed, net, cat, req)
