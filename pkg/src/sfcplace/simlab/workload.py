"""Poisson chain arrivals with exponential lifetimes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..model import ChainRequest

ARRIVAL = "arrival"
DEPARTURE = "departure"

DEFAULT_RATE = 1 / 100        # chains per second
DEFAULT_LIFETIME = 3 * 3600   # seconds


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    request: ChainRequest


def generate_requests(n: int, endpoints: Sequence[str], sfs: Sequence[str], mbps: int,
                      rate: float, mean_lifetime: float, seed: int) -> list[tuple[float, ChainRequest]]:
    """``n`` requests with exponential inter-arrivals and lifetimes and distinct random endpoints."""
    if rate <= 0 or mean_lifetime <= 0 or n < 1:
        raise ValueError("rate, lifetime and count must be positive")
    if len(endpoints) < 2:
        raise ValueError("need at least two endpoints")
    rng = np.random.default_rng(seed)
    gaps = rng.exponential(1 / rate, n)
    lifetimes = rng.exponential(mean_lifetime, n)
    out = []
    t = 0.0
    for i in range(n):
        t += float(gaps[i])
        src, dst = rng.choice(len(endpoints), 2, replace=False)
        req = ChainRequest(tuple(sfs), endpoints[int(src)], endpoints[int(dst)], mbps,
                           id=f"c{i}", lifetime=float(lifetimes[i]))
        out.append((t, req))
    return out


def generate_workload(cfg, seed: int) -> list[Event]:
    """Events of one run of ``cfg`` (an :class:`ExperimentConfig`) drawn with ``seed``."""
    from .topology import hosts
    requests = generate_requests(cfg.n_chains, hosts(cfg.network()), cfg.sfs, cfg.demand,
                                 cfg.rate, cfg.mean_lifetime, seed)
    return events_for(requests)


def events_for(requests: list[tuple[float, ChainRequest]]) -> list[Event]:
    """Arrival and departure events ordered by time; departures first on ties."""
    events = []
    for i, (t, req) in enumerate(requests):
        events.append((t, 1, i, Event(t, ARRIVAL, req)))
        events.append((t + req.lifetime, 0, i, Event(t + req.lifetime, DEPARTURE, req)))
    events.sort(key=lambda e: e[:3])
    return [e[3] for e in events]
