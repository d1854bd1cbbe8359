"""k-ary fat-tree data-center topology."""

from __future__ import annotations

from typing import Mapping, Optional

from ..model import InputError, Link, Node, SubstrateNetwork

DEFAULT_HOST = {"cpu": 8}


def generate_fat_tree(k: int, host_profile: Optional[Mapping[str, float]] = None,
                      link_mbps: int = 1000) -> SubstrateNetwork:
    """Fat-tree of arity ``k``: ``k^3/4`` hosts, ``5k^2/4`` switches, ``3k^3/4`` links.

    Node ids: ``core-i``, ``agg-p-i``, ``edge-p-i`` and ``host-p-e-h`` (pod
    ``p``, edge switch ``e``).  Switches get zero capacity for every resource.
    """
    if k < 2 or k % 2:
        raise InputError("bad-arity", f"fat-tree arity must be even and >= 2, got {k}")
    profile = dict(DEFAULT_HOST if host_profile is None else host_profile)
    kinds = tuple(profile)
    switch = {r: 0 for r in kinds}
    half = k // 2
    nodes, links = [], []
    for i in range(half * half):
        nodes.append(Node(f"core-{i}", switch))
    for p in range(k):
        for i in range(half):
            nodes.append(Node(f"agg-{p}-{i}", switch))
        for e in range(half):
            nodes.append(Node(f"edge-{p}-{e}", switch))
    for p in range(k):
        for e in range(half):
            for h in range(half):
                nodes.append(Node(f"host-{p}-{e}-{h}", profile))

    for p in range(k):
        for i in range(half):
            for c in range(half):
                links.append(Link(f"agg-{p}-{i}", f"core-{i * half + c}", link_mbps))
        for e in range(half):
            for i in range(half):
                links.append(Link(f"edge-{p}-{e}", f"agg-{p}-{i}", link_mbps))
            for h in range(half):
                links.append(Link(f"host-{p}-{e}-{h}", f"edge-{p}-{e}", link_mbps))
    return SubstrateNetwork(nodes, links, kinds)


def hosts(net: SubstrateNetwork) -> list[str]:
    return [n for n in net.node_ids if n.startswith("host-")]
