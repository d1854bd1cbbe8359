"""Bundled inputs: the six-host worked example and the off-the-shelf VNF catalog."""

from __future__ import annotations

import json
from importlib import resources

from . import io
from .model import ChainRequest, Deployment, SubstrateNetwork, VnfCatalog

# Chain templates used in the experiments; each extends the previous one.
CHAINS = {
    1: ("Firewall",),
    2: ("Firewall", "IDS"),
    3: ("Firewall", "IDS", "IPSec"),
    4: ("Firewall", "IDS", "IPSec", "WAN-opt"),
}


def _load(name: str):
    return json.loads(resources.files("sfcplace.data").joinpath(name).read_text())


def data_path(name: str):
    return resources.files("sfcplace.data").joinpath(name)


def worked_example() -> tuple[SubstrateNetwork, VnfCatalog, ChainRequest, Deployment]:
    """Hosts A..F (8 cores, 64 GB), 130 Mbps links, a 210 Mbps IDS -> FW chain from A to F,
    and the hand-placed deployment splitting 80/130 across hosts B and D."""
    return (io.network_from_dict(_load("worked_network.json")),
            io.catalog_from_dict(_load("worked_catalog.json")),
            io.request_from_dict(_load("worked_request.json")),
            io.deployment_from_dict(_load("worked_deployment.json")))


def offshelf_catalog() -> VnfCatalog:
    return io.catalog_from_dict(_load("offshelf_catalog.json"))
