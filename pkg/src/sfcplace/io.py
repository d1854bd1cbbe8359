"""JSON (de)serialization of networks, catalogs, requests and deployments."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

from .model import (ChainRequest, ConstraintReport, CostModel, Costs, Deployment, InputError,
                    Link, Node, SubstrateNetwork, VnfCatalog, VnfType, cents_to_decimal)


def read_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError("io", f"{path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError("parse", f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _field(obj, key, where, kind=None):
    if not isinstance(obj, dict):
        raise InputError("schema", f"{where}: expected an object")
    if key not in obj:
        raise InputError("schema", f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise InputError("schema", f"{where}.{key}: expected {kind.__name__ if isinstance(kind, type) else kind}")
    return value


def network_from_dict(data: dict, where: str = "network") -> SubstrateNetwork:
    kinds = _field(data, "resource_kinds", where, list)
    nodes = []
    for i, rec in enumerate(_field(data, "nodes", where, list)):
        at = f"{where}.nodes[{i}]"
        cap = _field(rec, "capacity", at, dict)
        nodes.append(Node(str(_field(rec, "id", at)), {r: v for r, v in cap.items()}))
    links = []
    for i, rec in enumerate(_field(data, "links", where, list)):
        at = f"{where}.links[{i}]"
        mbps = _field(rec, "mbps", at, (int, float))
        if int(mbps) != mbps:
            raise InputError("schema", f"{at}.mbps: bandwidth must be an integer")
        links.append(Link(str(_field(rec, "a", at)), str(_field(rec, "b", at)), int(mbps)))
    return SubstrateNetwork(nodes, links, kinds)


def network_to_dict(net: SubstrateNetwork) -> dict:
    return {
        "resource_kinds": list(net.resource_kinds),
        "nodes": [{"id": n.id, "capacity": dict(n.capacity)} for n in net.nodes],
        "links": [{"a": l.a, "b": l.b, "mbps": l.mbps} for l in net.links],
    }


def catalog_from_dict(data: dict, where: str = "catalog") -> VnfCatalog:
    if not isinstance(data, dict):
        raise InputError("schema", f"{where}: expected an object keyed by SF name")
    entries = {}
    for sf, types in data.items():
        if not isinstance(types, list):
            raise InputError("schema", f"{where}.{sf}: expected a list of VNF types")
        out = []
        for i, rec in enumerate(types):
            at = f"{where}.{sf}[{i}]"
            mbps = _field(rec, "mbps", at, (int, float))
            if int(mbps) != mbps or mbps <= 0:
                raise InputError("schema", f"{at}.mbps: throughput must be a positive integer")
            out.append(VnfType(str(_field(rec, "name", at)), int(mbps),
                               dict(_field(rec, "demand", at, dict))))
        entries[sf] = out
    return VnfCatalog(entries)


def catalog_to_dict(cat: VnfCatalog) -> dict:
    return {sf: [{"name": v.name, "mbps": v.mbps, "demand": dict(v.demand)} for v in types]
            for sf, types in cat.items()}


def request_from_dict(data: dict, where: str = "request") -> ChainRequest:
    sfs = _field(data, "sfs", where, list)
    mbps = _field(data, "mbps", where, (int, float))
    if int(mbps) != mbps:
        raise InputError("invalid-demand", f"{where}.mbps: demand must be an integer")
    return ChainRequest(tuple(str(s) for s in sfs), str(_field(data, "source", where)),
                        str(_field(data, "target", where)), int(mbps),
                        str(data.get("id", "")), data.get("lifetime"))


def request_to_dict(req: ChainRequest) -> dict:
    out = {"sfs": list(req.sfs), "source": req.source, "target": req.target, "mbps": req.mbps}
    if req.id:
        out["id"] = req.id
    return out


def cost_from_dict(data: Optional[dict]) -> CostModel:
    if not data:
        return CostModel()
    return CostModel(dict(data.get("alpha", {"cpu": 1})), data.get("beta", 0.01))


def deployment_to_dict(dep: Deployment, req: ChainRequest) -> dict:
    """Flows keyed by commodity; instances and allocations keyed by SF layer."""
    def layer(j):
        return req.layer_name(j)

    flows = [{"commodity": j, "from": layer(j), "to": layer(j + 1), "a": m, "b": n, "mbps": x}
             for (j, (m, n)), x in sorted(dep.flows.items())]
    instances = [{"node": m, "layer": j, "sf": layer(j), "vnf": u, "count": c}
                 for (m, j, u), c in sorted(dep.instances.items())]
    allocations = [{"node": m, "layer": j, "sf": layer(j), "mbps": z}
                   for (m, j), z in sorted(dep.allocations.items())]
    return {"flows": flows, "instances": instances, "allocations": allocations}


def deployment_from_dict(data: dict) -> Deployment:
    flows = {(f["commodity"], (f["a"], f["b"])): f["mbps"] for f in data.get("flows", [])}
    instances = {(i["node"], i["layer"], i["vnf"]): i["count"] for i in data.get("instances", [])}
    allocations = {(a["node"], a["layer"]): a["mbps"] for a in data.get("allocations", [])}
    return Deployment(flows, instances, allocations)


def costs_to_dict(costs: Costs) -> dict:
    return {"bandwidth": str(cents_to_decimal(costs.bandwidth)),
            "host": str(cents_to_decimal(costs.host)),
            "total": str(cents_to_decimal(costs.total))}


def report_to_dict(report: ConstraintReport) -> dict:
    return {name: {"passed": f.passed, "violations": [repr(v) for v in f.violations]}
            for name, f in report.families.items()}


def load_network(path) -> SubstrateNetwork:
    return network_from_dict(read_json(path), str(path))


def load_catalog(path) -> VnfCatalog:
    return catalog_from_dict(read_json(path), str(path))


def load_request(path) -> ChainRequest:
    return request_from_dict(read_json(path), str(path))


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=False) + "\n")
