"""Per-node VNF instance packing as a multidimensional knapsack.

``max_throughput`` finds the largest throughput a node can offer for one SF;
``min_cost_instances`` finds the cheapest instance mix covering a demand.
Both are exact searches over instance-count vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Optional, Sequence

from . import kernels
from .model import DEFAULT_COST, CostModel, VnfType

OBJECTIVES = ("cost", "cores")


@dataclass(frozen=True)
class PackingResult:
    counts: Mapping[str, int]
    achieved: int
    consumed: Mapping[str, float] = field(default_factory=dict)
    host_cost: int = 0

    @property
    def total_instances(self) -> int:
        return sum(self.counts.values())


EMPTY = PackingResult({}, 0, {}, 0)


def _weights(candidates: Sequence[VnfType], cost: CostModel, objective: str) -> tuple[int, ...]:
    if objective == "cost":
        return tuple(cost.host_cents(v) for v in candidates)
    if objective == "cores":
        return tuple(int(round(v.demand.get("cpu", 0) * 1000)) for v in candidates)
    raise ValueError(f"unknown packing objective {objective!r}")


def _resource_order(residual: Mapping[str, float], candidates: Sequence[VnfType]) -> tuple[str, ...]:
    kinds = list(residual)
    for v in candidates:
        for r in v.demand:
            if r not in kinds:
                kinds.append(r)
    return tuple(kinds)


def _problem(residual, candidates, cost, objective):
    kinds = _resource_order(residual, candidates)
    res = tuple(float(residual.get(r, 0)) for r in kinds)
    dem = tuple(tuple(float(v.demand.get(r, 0)) for r in kinds) for v in candidates)
    mbps = tuple(int(v.mbps) for v in candidates)
    weights = _weights(candidates, cost, objective)
    return kinds, res, dem, mbps, weights


def _result(candidates, kinds, dem, counts, achieved, cost: CostModel) -> PackingResult:
    chosen = {v.name: c for v, c in zip(candidates, counts) if c}
    consumed = {}
    for r_i, r in enumerate(kinds):
        used = sum(c * dem[u][r_i] for u, c in enumerate(counts))
        if used:
            consumed[r] = used
    host = sum(c * cost.host_cents(v) for v, c in zip(candidates, counts))
    return PackingResult(chosen, achieved, consumed, host)


@lru_cache(maxsize=1 << 16)
def _cached_max(res, dem, mbps, weights):
    return kernels.packing_max(res, dem, mbps, weights)


@lru_cache(maxsize=1 << 16)
def _cached_min(res, dem, mbps, weights, target):
    return kernels.packing_min_cost(res, dem, mbps, weights, target)


def max_throughput(residual: Mapping[str, float], candidates: Sequence[VnfType],
                   cost: CostModel = DEFAULT_COST, objective: str = "cost") -> PackingResult:
    """Largest total throughput installable within ``residual``.

    Among packings with equal throughput the cheaper one wins (host cost, or
    cores with ``objective="cores"``), then the lexicographically smaller
    count vector in catalog order.
    """
    if not candidates:
        return EMPTY
    kinds, res, dem, mbps, weights = _problem(residual, candidates, cost, objective)
    counts, achieved, _ = _cached_max(res, dem, mbps, weights)
    return _result(candidates, kinds, dem, counts, achieved, cost)


def min_cost_instances(residual: Mapping[str, float], demand: int, candidates: Sequence[VnfType],
                       cost: CostModel = DEFAULT_COST, objective: str = "cost") -> Optional[PackingResult]:
    """Cheapest instance mix providing at least ``demand`` Mbps, or ``None`` if impossible."""
    if demand < 0:
        raise ValueError("demand must be non-negative")
    if demand == 0:
        return EMPTY
    if not candidates:
        return None
    kinds, res, dem, mbps, weights = _problem(residual, candidates, cost, objective)
    found = _cached_min(res, dem, mbps, weights, int(demand))
    if found is None:
        return None
    counts, achieved, _ = found
    return _result(candidates, kinds, dem, counts, achieved, cost)


def clear_caches():
    _cached_max.cache_clear()
    _cached_min.cache_clear()
