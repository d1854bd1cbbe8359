"""Configuration of one simulated experiment cell."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

from ..datasets import CHAINS, offshelf_catalog
from ..model import DEFAULT_COST, CostModel, SubstrateNetwork, VnfCatalog
from .topology import generate_fat_tree
from .workload import DEFAULT_LIFETIME, DEFAULT_RATE

SOLVERS = ("kariz", "exact")


@lru_cache(maxsize=16)
def _fat_tree(k, profile, link_mbps):
    return generate_fat_tree(k, dict(profile), link_mbps)


@dataclass(frozen=True)
class ExperimentConfig:
    k: int = 4
    sfs: tuple = CHAINS[2]
    demand: int = 200
    rate: float = DEFAULT_RATE
    mean_lifetime: float = DEFAULT_LIFETIME
    n_chains: int = 200
    seed: int = 0
    solver: str = "kariz"
    epsilon: float = 20
    cost: CostModel = DEFAULT_COST
    host_profile: tuple = (("cpu", 8),)
    link_mbps: int = 1000
    catalog: VnfCatalog = field(default_factory=offshelf_catalog, compare=False)
    network_override: Optional[SubstrateNetwork] = field(default=None, compare=False)
    exact_engine: str = "highs"
    exact_time_limit: float = 60.0

    def __post_init__(self):
        if self.network_override is None and (self.k < 2 or self.k % 2):
            raise ValueError("fat-tree arity must be even and >= 2")
        if self.rate <= 0 or self.mean_lifetime <= 0 or self.n_chains < 1:
            raise ValueError("rate, lifetime and chain count must be positive")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "sfs", tuple(self.sfs))

    def network(self) -> SubstrateNetwork:
        if self.network_override is not None:
            return self.network_override
        return _fat_tree(self.k, tuple(self.host_profile), self.link_mbps)

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)
