"""Discrete-event experiment loop: admit chains on arrival, release them on departure."""

from __future__ import annotations

import csv
import time
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .. import kariz
from ..linprog import SolveLimits, build_milp, solve_milp
from ..model import (ChainRequest, Costs, Deployment, SubstrateNetwork, cents_to_decimal,
                     feasibility_check, total_cost)
from .config import ExperimentConfig
from .workload import ARRIVAL, generate_workload

CHAIN_COLUMNS = ("id", "arrival_t", "lifetime", "length", "demand", "accepted",
                 "bw_cost", "host_cost", "total_cost")
SUMMARY_COLUMNS = ("seed", "solver", "length", "demand", "chains", "accepted",
                   "acceptance_ratio", "bw_utilization", "cpu_utilization", "vnf_utilization",
                   "mean_bw_cost", "mean_host_cost", "mean_total_cost")


@dataclass
class ChainRecord:
    id: str
    arrival_t: float
    lifetime: float
    length: int
    demand: int
    accepted: bool
    costs: Optional[Costs] = None
    reason: str = ""
    deployment: Optional[Deployment] = None
    request: Optional[ChainRequest] = None
    vnf_load: dict = field(default_factory=dict)   # sf -> (allocated, installed)

    def row(self) -> dict:
        def money(v):
            return "" if self.costs is None else str(cents_to_decimal(v))
        c = self.costs or Costs(0, 0, 0)
        return {"id": self.id, "arrival_t": repr(self.arrival_t), "lifetime": repr(self.lifetime),
                "length": self.length, "demand": self.demand, "accepted": int(self.accepted),
                "bw_cost": money(c.bandwidth), "host_cost": money(c.host),
                "total_cost": money(c.total)}


@dataclass
class ExperimentMetrics:
    config: ExperimentConfig
    records: list[ChainRecord]
    bw_utilization: float
    cpu_utilization: float
    vnf_utilization: dict[str, float]
    seconds: float = 0.0

    @property
    def accepted(self) -> list[ChainRecord]:
        return [r for r in self.records if r.accepted]

    @property
    def acceptance_ratio(self) -> float:
        return len(self.accepted) / len(self.records)

    def _mean(self, attr) -> float:
        acc = self.accepted
        if not acc:
            return 0.0
        return sum(getattr(r.costs, attr) for r in acc) / len(acc) / 100

    @property
    def mean_bw_cost(self) -> float:
        return self._mean("bandwidth")

    @property
    def mean_host_cost(self) -> float:
        return self._mean("host")

    @property
    def mean_total_cost(self) -> float:
        return self._mean("total")

    @property
    def mean_vnf_utilization(self) -> float:
        vals = list(self.vnf_utilization.values())
        return sum(vals) / len(vals) if vals else 0.0

    def summary(self) -> dict:
        cfg = self.config
        return {"seed": cfg.seed, "solver": cfg.solver, "length": len(cfg.sfs),
                "demand": cfg.demand, "chains": len(self.records),
                "accepted": len(self.accepted), "acceptance_ratio": self.acceptance_ratio,
                "bw_utilization": self.bw_utilization, "cpu_utilization": self.cpu_utilization,
                "vnf_utilization": self.mean_vnf_utilization,
                "mean_bw_cost": self.mean_bw_cost, "mean_host_cost": self.mean_host_cost,
                "mean_total_cost": self.mean_total_cost, "seconds": round(self.seconds, 3)}


class ResidualNetwork:
    """Exact residual bookkeeping over a pristine substrate."""

    def __init__(self, net: SubstrateNetwork):
        self.pristine = net
        self.node = {n.id: {r: Fraction(v) for r, v in n.capacity.items()} for n in net.nodes}
        self.link = [l.mbps for l in net.links]
        self._view: Optional[SubstrateNetwork] = None

    def view(self) -> SubstrateNetwork:
        if self._view is None:
            caps = {m: {r: float(v) for r, v in c.items()} for m, c in self.node.items()}
            self._view = self.pristine.with_capacities(caps, dict(enumerate(self.link)))
        return self._view

    def patch(self, dep: Deployment, req: ChainRequest, cat) -> tuple[dict, dict]:
        """Resource amounts consumed by ``dep``; applied with sign -1 and released with +1."""
        nodes = {m: {r: Fraction(v) for r, v in used.items()}
                 for m, used in dep.node_usage(req, cat).items()}
        return nodes, dep.link_usage(self.pristine)

    def apply(self, patch, sign: int) -> None:
        nodes, links = patch
        for m, used in nodes.items():
            for r, v in used.items():
                self.node[m][r] += sign * v
                if self.node[m][r] < 0:
                    raise AssertionError(f"node {m} resource {r} over-committed")
        for i, v in links.items():
            self.link[i] += sign * v
            if self.link[i] < 0:
                raise AssertionError(f"link {i} over-committed")
        self._view = None

    def node_used(self, resource: str) -> Fraction:
        return sum((Fraction(n.capacity.get(resource, 0)) - self.node[n.id].get(resource, 0)
                    for n in self.pristine.nodes), Fraction(0))

    def link_used(self) -> int:
        return sum(l.mbps - r for l, r in zip(self.pristine.links, self.link))

    def is_pristine(self) -> bool:
        return (all(self.node[n.id] == {r: Fraction(v) for r, v in n.capacity.items()}
                    for n in self.pristine.nodes)
                and self.link == [l.mbps for l in self.pristine.links])


def solve_request(cfg: ExperimentConfig, net: SubstrateNetwork, req: ChainRequest):
    """``(deployment, costs, reason)`` for one arrival; deployment is None on rejection."""
    if cfg.solver == "kariz":
        res = kariz.deploy(net, req, cfg.catalog, cfg.cost, cfg.epsilon)
        return res.deployment, res.costs, res.reason
    p = build_milp(net, req, cfg.catalog, cfg.cost)
    res = solve_milp(p, SolveLimits(time_limit=cfg.exact_time_limit), engine=cfg.exact_engine)
    if not res.accepted:
        return None, None, res.reason or res.status
    return res.deployment, res.costs, ""


def _vnf_load(dep: Deployment, req: ChainRequest, cat) -> dict:
    out = {}
    for j in range(1, req.length + 1):
        allocated = sum(z for (m, jj), z in dep.allocations.items() if jj == j)
        out[req.sfs[j - 1]] = (allocated, dep.layer_capacity(req, cat, j))
    return out


def run_experiment(cfg: ExperimentConfig) -> ExperimentMetrics:
    """Run the event loop of ``cfg``; the residual network must end pristine."""
    started = time.perf_counter()
    net = cfg.network()
    residual = ResidualNetwork(net)
    events = generate_workload(cfg, cfg.seed)
    records: dict[str, ChainRecord] = {}
    patches = {}

    total_bw = sum(l.mbps for l in net.links)
    total_cpu = sum(Fraction(n.capacity.get("cpu", 0)) for n in net.nodes)
    horizon = max(e.time for e in events if e.kind == ARRIVAL)
    bw_area = Fraction(0)
    cpu_area = Fraction(0)
    last_t = 0.0

    for ev in events:
        # utilization is integrated over the arrival window [0, last arrival]
        t = min(ev.time, horizon)
        if t > last_t:
            width = Fraction(t) - Fraction(last_t)
            bw_area += width * residual.link_used()
            cpu_area += width * residual.node_used("cpu")
            last_t = t
        req = ev.request
        if ev.kind == ARRIVAL:
            view = residual.view()
            dep, costs, reason = solve_request(cfg, view, req)
            rec = ChainRecord(req.id, ev.time, req.lifetime, req.length, req.mbps, dep is not None,
                              costs, reason, dep, req)
            if dep is not None:
                report = feasibility_check(view, req, cfg.catalog, dep)
                if not report.feasible:
                    raise AssertionError(f"{req.id}: solver returned an infeasible deployment\n{report}")
                if total_cost(dep, cfg.cost, req, cfg.catalog) != costs:
                    raise AssertionError(f"{req.id}: reported costs disagree with the deployment")
                patches[req.id] = residual.patch(dep, req, cfg.catalog)
                residual.apply(patches[req.id], -1)
                rec.vnf_load = _vnf_load(dep, req, cfg.catalog)
            records[req.id] = rec
        elif req.id in patches:
            residual.apply(patches.pop(req.id), +1)

    if not residual.is_pristine():
        raise AssertionError("residual network differs from the pristine network after all departures")

    bw_util = float(bw_area / (total_bw * Fraction(horizon))) if total_bw and horizon else 0.0
    cpu_util = float(cpu_area / (total_cpu * Fraction(horizon))) if total_cpu and horizon else 0.0
    vnf = defaultdict(list)
    for rec in records.values():
        for sf, (allocated, installed) in rec.vnf_load.items():
            vnf[sf].append(Fraction(allocated, installed))
    vnf_util = {sf: float(sum(v) / len(v)) for sf, v in vnf.items()}
    return ExperimentMetrics(cfg, list(records.values()), bw_util, cpu_util, vnf_util,
                             time.perf_counter() - started)


def replay_log(metrics: ExperimentMetrics) -> list[str]:
    """Independently replay the per-chain log; returns a list of discrepancies.

    Re-walks arrivals and departures using the recorded deployments only,
    checking feasibility against the residual state at each commit and the
    recorded costs against the cost model.
    """
    cfg = metrics.config
    residual = ResidualNetwork(cfg.network())
    by_id = {r.id: r for r in metrics.records}
    problems = []
    for ev in generate_workload(cfg, cfg.seed):
        rec = by_id[ev.request.id]
        if not rec.accepted:
            continue
        if ev.kind == ARRIVAL:
            report = feasibility_check(residual.view(), rec.request, cfg.catalog, rec.deployment)
            if not report.feasible:
                problems.append(f"{rec.id}: infeasible at commit ({report.failed()})")
            if total_cost(rec.deployment, cfg.cost, rec.request, cfg.catalog) != rec.costs:
                problems.append(f"{rec.id}: cost mismatch")
            residual.apply(residual.patch(rec.deployment, rec.request, cfg.catalog), -1)
        else:
            residual.apply(residual.patch(rec.deployment, rec.request, cfg.catalog), +1)
    if not residual.is_pristine():
        problems.append("replay did not end pristine")
    return problems


def write_chain_csv(metrics: ExperimentMetrics, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CHAIN_COLUMNS, lineterminator="\n")
        w.writeheader()
        for rec in metrics.records:
            w.writerow(rec.row())


def write_summary_csv(rows: list[dict], path, columns=SUMMARY_COLUMNS) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow(row)


def read_chain_csv(path) -> list[dict]:
    with open(Path(path), newline="") as fh:
        return list(csv.DictReader(fh))
