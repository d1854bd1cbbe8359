"""Domain types for substrate networks, chains, catalogs and deployments.

Layers of a chain are indexed ``0..k+1``: layer 0 is the source endpoint,
layers ``1..k`` are the service functions in order and layer ``k+1`` is the
target endpoint.  Commodity ``j`` is the traffic emitted by layer ``j`` and
consumed by layer ``j+1``, so commodities range over ``0..k``.

Traffic is integer Mbps throughout.  Costs are integers in units of 0.01.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

EPS = 1e-9

SOURCE_VNF = "@source"
TARGET_VNF = "@target"


class InputError(ValueError):
    """Malformed or inconsistent input (distinct from a constraint violation)."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def _freeze(mapping) -> Mapping:
    return MappingProxyType(dict(mapping))


@dataclass(frozen=True)
class Node:
    id: str
    capacity: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "capacity", _freeze(self.capacity))


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    mbps: int


class SubstrateNetwork:
    """Undirected capacitated graph with per-node resource capacities."""

    def __init__(self, nodes: Iterable[Node], links: Iterable[Link],
                 resource_kinds: Sequence[str] = ("cpu",)):
        self.nodes: tuple[Node, ...] = tuple(nodes)
        self.links: tuple[Link, ...] = tuple(links)
        self.resource_kinds: tuple[str, ...] = tuple(resource_kinds)

        self._index: dict[str, int] = {}
        for i, node in enumerate(self.nodes):
            if node.id in self._index:
                raise InputError("duplicate-node", f"duplicate node id {node.id!r}")
            self._index[node.id] = i
            for r, value in node.capacity.items():
                if r not in self.resource_kinds:
                    raise InputError("unknown-resource",
                                     f"node {node.id!r} has unknown resource {r!r}")
                if value < 0:
                    raise InputError("negative-capacity",
                                     f"node {node.id!r} capacity {r}={value} < 0")

        self._link_index: dict[frozenset, int] = {}
        self._adjacency: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for i, link in enumerate(self.links):
            if link.a == link.b:
                raise InputError("self-loop", f"link endpoints equal: {link.a!r}")
            for end in (link.a, link.b):
                if end not in self._index:
                    raise InputError("unknown-node", f"link references unknown node {end!r}")
            if link.mbps < 0 or int(link.mbps) != link.mbps:
                raise InputError("bad-bandwidth",
                                 f"link {link.a}-{link.b} bandwidth must be a non-negative integer")
            key = frozenset((link.a, link.b))
            if key in self._link_index:
                raise InputError("parallel-link", f"parallel link {link.a}-{link.b}")
            self._link_index[key] = i
            self._adjacency[link.a].append(link.b)
            self._adjacency[link.b].append(link.a)

    def __repr__(self):
        return f"SubstrateNetwork({len(self.nodes)} nodes, {len(self.links)} links)"

    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def __contains__(self, node_id) -> bool:
        return node_id in self._index

    def index(self, node_id: str) -> int:
        try:
            return self._index[node_id]
        except KeyError:
            raise InputError("unknown-node", f"unknown node {node_id!r}") from None

    def node(self, node_id: str) -> Node:
        return self.nodes[self.index(node_id)]

    def capacity(self, node_id: str, resource: str) -> float:
        return self.node(node_id).capacity.get(resource, 0)

    def neighbors(self, node_id: str) -> list[str]:
        return self._adjacency[node_id]

    def link_index(self, m: str, n: str) -> Optional[int]:
        return self._link_index.get(frozenset((m, n)))

    def link_between(self, m: str, n: str) -> Optional[Link]:
        i = self.link_index(m, n)
        return None if i is None else self.links[i]

    def directed_arcs(self) -> list[tuple[str, str]]:
        arcs = []
        for link in self.links:
            arcs.append((link.a, link.b))
            arcs.append((link.b, link.a))
        return arcs

    def with_capacities(self, node_capacity: Mapping[str, Mapping[str, float]],
                        link_mbps: Mapping[int, int]) -> "SubstrateNetwork":
        """Copy of this network with replaced capacities (used for residual views)."""
        nodes = [Node(n.id, node_capacity.get(n.id, n.capacity)) for n in self.nodes]
        links = [Link(l.a, l.b, int(link_mbps.get(i, l.mbps))) for i, l in enumerate(self.links)]
        return SubstrateNetwork(nodes, links, self.resource_kinds)


@dataclass(frozen=True)
class VnfType:
    name: str
    mbps: int
    demand: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "demand", _freeze(self.demand))
        if self.mbps <= 0 or int(self.mbps) != self.mbps:
            raise InputError("bad-throughput", f"VNF {self.name!r} throughput must be a positive integer")
        for r, v in self.demand.items():
            if v < 0:
                raise InputError("negative-demand", f"VNF {self.name!r} demand {r}={v} < 0")
        if not any(v > 0 for v in self.demand.values()):
            raise InputError("zero-demand", f"VNF {self.name!r} must demand some resource")

    def __hash__(self):
        return hash((self.name, self.mbps, tuple(sorted(self.demand.items()))))


class VnfCatalog(Mapping[str, tuple[VnfType, ...]]):
    """SF name -> available VNF types, in declaration order."""

    def __init__(self, entries: Mapping[str, Iterable[VnfType]]):
        self._entries = {sf: tuple(types) for sf, types in entries.items()}
        for sf, types in self._entries.items():
            names = [t.name for t in types]
            if len(set(names)) != len(names):
                raise InputError("duplicate-vnf", f"duplicate VNF names under {sf!r}")

    def __getitem__(self, sf):
        return self._entries[sf]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __repr__(self):
        return f"VnfCatalog({list(self._entries)})"

    def vnf(self, sf: str, name: str) -> VnfType:
        for t in self._entries.get(sf, ()):
            if t.name == name:
                return t
        raise InputError("unknown-vnf", f"no VNF {name!r} for SF {sf!r}")


@dataclass(frozen=True)
class ChainRequest:
    sfs: tuple[str, ...]
    source: str
    target: str
    mbps: int
    id: str = ""
    lifetime: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "sfs", tuple(self.sfs))

    @property
    def length(self) -> int:
        return len(self.sfs)

    @property
    def n_layers(self) -> int:
        return len(self.sfs) + 2

    def layer_name(self, j: int) -> str:
        if j == 0:
            return "source"
        if j == len(self.sfs) + 1:
            return "target"
        return self.sfs[j - 1]


FlowKey = tuple  # (commodity, (m, n))
InstanceKey = tuple  # (node, layer, vnf name)
AllocationKey = tuple  # (node, layer)


@dataclass(frozen=True)
class Deployment:
    """Solution triple: flows X, instance counts Y, allocations Z.

    Endpoint allocations are implicit: ``z[s, 0] = z[t, k+1] = b``.
    Zero entries are dropped on construction.
    """

    flows: Mapping[FlowKey, int] = field(default_factory=dict)
    instances: Mapping[InstanceKey, int] = field(default_factory=dict)
    allocations: Mapping[AllocationKey, int] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("flows", "instances", "allocations"):
            values = getattr(self, name)
            for key, v in values.items():
                if v < 0:
                    raise InputError("negative-value", f"{name}[{key}] = {v} < 0")
            object.__setattr__(self, name, _freeze({k: v for k, v in values.items() if v}))

    def __eq__(self, other):
        if not isinstance(other, Deployment):
            return NotImplemented
        return (dict(self.flows) == dict(other.flows)
                and dict(self.instances) == dict(other.instances)
                and dict(self.allocations) == dict(other.allocations))

    def __hash__(self):
        return hash((frozenset(self.flows.items()), frozenset(self.instances.items()),
                     frozenset(self.allocations.items())))

    @property
    def is_empty(self) -> bool:
        return not (self.flows or self.instances or self.allocations)

    def merged(self, other: "Deployment") -> "Deployment":
        def add(a, b):
            out = dict(a)
            for k, v in b.items():
                out[k] = out.get(k, 0) + v
            return out
        return Deployment(add(self.flows, other.flows), add(self.instances, other.instances),
                          add(self.allocations, other.allocations))

    def link_usage(self, net: SubstrateNetwork) -> dict[int, int]:
        """Total Mbps per undirected link index, both directions and all commodities."""
        usage: dict[int, int] = defaultdict(int)
        for (_, (m, n)), v in self.flows.items():
            i = net.link_index(m, n)
            if i is None:
                raise InputError("unknown-link", f"flow on missing link {m}-{n}")
            usage[i] += v
        return dict(usage)

    def node_usage(self, req: ChainRequest, cat: VnfCatalog) -> dict[str, dict[str, float]]:
        usage: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))
        for (m, j, u), count in self.instances.items():
            if u in (SOURCE_VNF, TARGET_VNF):
                continue
            vnf = cat.vnf(req.sfs[j - 1], u)
            for r, d in vnf.demand.items():
                usage[m][r] += d * count
        return {m: dict(v) for m, v in usage.items()}

    def layer_capacity(self, req: ChainRequest, cat: VnfCatalog, j: int) -> int:
        """Installed throughput (sum of y*q) of layer ``j`` over all nodes."""
        total = 0
        for (m, jj, u), count in self.instances.items():
            if jj == j and u not in (SOURCE_VNF, TARGET_VNF):
                total += count * cat.vnf(req.sfs[j - 1], u).mbps
        return total


def _cents(value: Decimal, what: str) -> int:
    scaled = value * 100
    if scaled != scaled.to_integral_value():
        raise InputError("cost-resolution", f"{what} = {value} is not representable at 0.01")
    return int(scaled)


@dataclass(frozen=True)
class CostModel:
    alpha: Mapping[str, float] = field(default_factory=lambda: {"cpu": 1})
    beta: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "alpha", _freeze(self.alpha))
        if self.beta < 0 or any(v < 0 for v in self.alpha.values()):
            raise InputError("negative-weight", "cost weights must be non-negative")
        object.__setattr__(self, "_beta_cents",
                           _cents(Decimal(str(self.beta)), "beta"))

    @property
    def beta_cents(self) -> int:
        """Cost of one Mbps on one directed link, in 0.01 units."""
        return self._beta_cents

    def host_cents(self, vnf: VnfType) -> int:
        """Cost of one instance of ``vnf``, in 0.01 units."""
        total = Decimal(0)
        for r, d in vnf.demand.items():
            total += Decimal(str(self.alpha.get(r, 0))) * Decimal(str(d))
        return _cents(total, f"host cost of {vnf.name}")

    def scaled(self, factor) -> "CostModel":
        f = Decimal(str(factor))
        return CostModel({r: float(Decimal(str(a)) * f) for r, a in self.alpha.items()},
                         float(Decimal(str(self.beta)) * f))


DEFAULT_COST = CostModel({"cpu": 1}, 0.01)


class Costs(NamedTuple):
    """Bandwidth, host and total cost in integer units of 0.01."""

    bandwidth: int
    host: int
    total: int

    def as_decimal(self) -> tuple[Decimal, Decimal, Decimal]:
        return tuple(Decimal(v) / 100 for v in self)


def cents_to_decimal(cents: int) -> Decimal:
    return Decimal(cents) / 100


def total_cost(dep: Deployment, cost: CostModel, req: ChainRequest = None,
               cat: VnfCatalog = None) -> Costs:
    """Bandwidth cost (every directed Mbps-hop once) plus host cost over all nodes."""
    bandwidth = cost.beta_cents * sum(dep.flows.values())
    host = 0
    for (m, j, u), count in dep.instances.items():
        if u in (SOURCE_VNF, TARGET_VNF):
            continue
        if cat is None or req is None:
            raise InputError("missing-catalog", "catalog and request needed to price instances")
        host += count * cost.host_cents(cat.vnf(req.sfs[j - 1], u))
    return Costs(bandwidth, host, bandwidth + host)


def validate_inputs(net: SubstrateNetwork, req: ChainRequest, cat: VnfCatalog) -> None:
    """Raise :class:`InputError` if the request/catalog are unusable on ``net``."""
    for end, label in ((req.source, "source"), (req.target, "target")):
        if end not in net:
            raise InputError("unknown-node", f"{label} {end!r} is not a substrate node")
    if not req.sfs:
        raise InputError("empty-chain", "chain must contain at least one SF")
    if req.mbps < 1 or int(req.mbps) != req.mbps:
        raise InputError("invalid-demand", f"demand must be a positive integer, got {req.mbps}")
    for sf in req.sfs:
        if sf not in cat:
            raise InputError("missing-catalog", f"no catalog entry for SF {sf!r}")
        if not cat[sf]:
            raise InputError("missing-catalog", f"catalog entry for SF {sf!r} is empty")
        for vnf in cat[sf]:
            for r in vnf.demand:
                if r not in net.resource_kinds:
                    raise InputError("unknown-resource",
                                     f"VNF {vnf.name!r} demands unknown resource {r!r}")


@dataclass
class FamilyResult:
    passed: bool = True
    violations: list = field(default_factory=list)

    def fail(self, index, detail=None):
        self.passed = False
        self.violations.append(index if detail is None else (index, detail))


FAMILIES = ("node_capacity", "location", "link_capacity", "throughput",
            "demand", "flow_conservation")


@dataclass
class ConstraintReport:
    families: dict[str, FamilyResult]

    @property
    def feasible(self) -> bool:
        return all(f.passed for f in self.families.values())

    def failed(self) -> list[str]:
        return [name for name, f in self.families.items() if not f.passed]

    def __str__(self):
        lines = []
        for name in FAMILIES:
            f = self.families[name]
            lines.append(f"{name}: {'pass' if f.passed else 'FAIL ' + str(f.violations[:5])}")
        return "\n".join(lines)


def _check_keys(net, req, cat, dep):
    k = req.length
    for (j, (m, n)) in dep.flows:
        if not (0 <= j <= k):
            raise InputError("unknown-commodity", f"flow commodity {j} outside 0..{k}")
        if m not in net or n not in net:
            raise InputError("unknown-node", f"flow references unknown node {m!r}/{n!r}")
        if net.link_index(m, n) is None:
            raise InputError("unknown-link", f"flow on missing link {m}-{n}")
    for (m, j, u) in dep.instances:
        if m not in net:
            raise InputError("unknown-node", f"instance on unknown node {m!r}")
        if u == SOURCE_VNF and j == 0 or u == TARGET_VNF and j == k + 1:
            continue
        if not (1 <= j <= k):
            raise InputError("unknown-layer", f"instance layer {j} outside 1..{k}")
        cat.vnf(req.sfs[j - 1], u)
    for (m, j) in dep.allocations:
        if m not in net:
            raise InputError("unknown-node", f"allocation on unknown node {m!r}")
        if not (1 <= j <= k):
            raise InputError("unknown-layer", f"allocation layer {j} outside 1..{k}")


def endpoint_allocation(req: ChainRequest, m: str, j: int) -> int:
    if j == 0:
        return req.mbps if m == req.source else 0
    if j == req.length + 1:
        return req.mbps if m == req.target else 0
    raise ValueError(j)


def feasibility_check(net: SubstrateNetwork, req: ChainRequest, cat: VnfCatalog,
                      dep: Deployment) -> ConstraintReport:
    """Check the six constraint families of the placement model against ``dep``."""
    validate_inputs(net, req, cat)
    _check_keys(net, req, cat, dep)
    k = req.length
    report = {name: FamilyResult() for name in FAMILIES}

    # node capacity
    usage = dep.node_usage(req, cat)
    for m, used in usage.items():
        for r, amount in used.items():
            if amount > net.capacity(m, r) + EPS:
                report["node_capacity"].fail((m, r), amount)

    # location: pseudo instances only at the endpoints
    for (m, j, u), count in dep.instances.items():
        if u == SOURCE_VNF and (m != req.source or count != 1):
            report["location"].fail((m, u), count)
        if u == TARGET_VNF and (m != req.target or count != 1):
            report["location"].fail((m, u), count)

    # link capacity, both directions summed
    for i, used in dep.link_usage(net).items():
        if used > net.links[i].mbps:
            report["link_capacity"].fail((net.links[i].a, net.links[i].b), used)

    # throughput: installed capacity covers allocation
    installed: dict[tuple, int] = defaultdict(int)
    for (m, j, u), count in dep.instances.items():
        if 1 <= j <= k:
            installed[m, j] += count * cat.vnf(req.sfs[j - 1], u).mbps
    for (m, j), z in dep.allocations.items():
        if installed.get((m, j), 0) < z:
            report["throughput"].fail((m, j), (installed.get((m, j), 0), z))

    # demand: every SF layer allocates exactly b
    per_layer = defaultdict(int)
    for (m, j), z in dep.allocations.items():
        per_layer[j] += z
    for j in range(1, k + 1):
        if per_layer[j] != req.mbps:
            report["demand"].fail(j, per_layer[j])

    # flow conservation with local processing
    net_out: dict[tuple, int] = defaultdict(int)
    for (j, (m, n)), x in dep.flows.items():
        net_out[m, j] += x
        net_out[n, j] -= x
    for m in net.node_ids:
        for j in range(k + 1):
            zu = endpoint_allocation(req, m, 0) if j == 0 else dep.allocations.get((m, j), 0)
            zv = (endpoint_allocation(req, m, k + 1) if j == k
                  else dep.allocations.get((m, j + 1), 0))
            if net_out.get((m, j), 0) != zu - zv:
                report["flow_conservation"].fail((m, j), (net_out.get((m, j), 0), zu - zv))

    return ConstraintReport(report)
