"""Command-line interface: ``solve``, ``experiment`` and ``topology``.

Exit codes: 0 success (request accepted), 2 request rejected, 1 usage or
input error.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from statistics import mean

from . import io, kariz
from .datasets import CHAINS, offshelf_catalog
from .linprog import SolveLimits, build_milp, solve_milp, write_mps
from .model import InputError, feasibility_check
from .simlab import (ExperimentConfig, generate_fat_tree, run_experiment, write_chain_csv,
                     write_summary_csv)
from .simlab.experiment import SUMMARY_COLUMNS

EXIT_OK, EXIT_ERROR, EXIT_REJECTED = 0, 1, 2

AGGREGATE_COLUMNS = ("solver", "length", "demand", "seeds") + SUMMARY_COLUMNS[5:]
RATIO_COLUMNS = ("length", "demand", "seeds", "kariz_acceptance", "exact_acceptance",
                 "acceptance_ratio", "kariz_mean_cost", "exact_mean_cost", "cost_ratio")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _positive(text):
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _seeds(text):
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("seeds must be comma-separated integers") from None
    if not seeds or len(set(seeds)) != len(seeds):
        raise argparse.ArgumentTypeError("seeds must be distinct and non-empty")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sfcplace", description="Service function chain placement")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="place one chain request")
    s.add_argument("network")
    s.add_argument("catalog")
    s.add_argument("request")
    s.add_argument("--solver", choices=("kariz", "exact"), default="kariz")
    s.add_argument("--epsilon", type=_positive, default=kariz.DEFAULT_EPSILON)
    s.add_argument("--cost", help="JSON cost model {alpha: {...}, beta: ...}")
    s.add_argument("--engine", choices=("bnb", "highs"), default="bnb",
                   help="exact solver engine")
    s.add_argument("--time-limit", type=_positive, default=300.0)
    s.add_argument("--mps", help="also write the exact model in MPS format")
    s.add_argument("--out", help="output JSON path (default stdout)")

    e = sub.add_parser("experiment", help="run simulated experiment batches")
    e.add_argument("config")
    e.add_argument("--seeds", type=_seeds, default=[0])
    e.add_argument("--out-dir", required=True)
    e.add_argument("--jobs", type=int, default=1)

    t = sub.add_parser("topology", help="write a k-ary fat-tree network")
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--cpu", type=float, default=8)
    t.add_argument("--mem", type=float, help="per-host memory (adds a mem resource)")
    t.add_argument("--link-mbps", type=int, default=1000)
    t.add_argument("--out", help="output JSON path (default stdout)")
    return p


def _emit(data, out):
    if out:
        io.write_json(out, data)
    else:
        import json
        print(json.dumps(data, indent=2))


def cmd_solve(args) -> int:
    net = io.load_network(args.network)
    cat = io.load_catalog(args.catalog)
    req = io.load_request(args.request)
    cost = io.cost_from_dict(io.read_json(args.cost)) if args.cost else io.cost_from_dict(None)
    out = {"request": io.request_to_dict(req), "solver": args.solver}
    if args.solver == "kariz":
        res = kariz.deploy(net, req, cat, cost, args.epsilon)
        dep, costs, reason = res.deployment, res.costs, res.reason
        out["status"] = "accepted" if res.accepted else "rejected"
    else:
        p = build_milp(net, req, cat, cost)
        if args.mps:
            Path(args.mps).write_text(write_mps(p.lp, p.integer))
        res = solve_milp(p, SolveLimits(time_limit=args.time_limit), engine=args.engine)
        dep, costs, reason = res.deployment, res.costs, res.reason
        out["status"] = res.status
    out["accepted"] = dep is not None
    if dep is None:
        out["reason"] = reason
        _emit(out, args.out)
        return EXIT_REJECTED
    report = feasibility_check(net, req, cat, dep)
    out["deployment"] = io.deployment_to_dict(dep, req)
    out["costs"] = io.costs_to_dict(costs)
    out["feasibility"] = {"feasible": report.feasible, "families": io.report_to_dict(report)}
    _emit(out, args.out)
    return EXIT_OK if report.feasible else EXIT_REJECTED


def load_experiment_config(path) -> list[ExperimentConfig]:
    """Expand an experiment file into one config per (solver, chain, demand) cell."""
    data = io.read_json(path)
    if not isinstance(data, dict):
        raise InputError("schema", f"{path}: expected an object")
    base = Path(path).parent
    topo = data.get("topology", {"k": 4})
    kwargs = {}
    if "network" in topo:
        kwargs["network_override"] = io.load_network(base / topo["network"])
    else:
        kwargs["k"] = int(topo.get("k", 4))
        kwargs["host_profile"] = tuple(topo.get("host_profile", {"cpu": 8}).items())
        kwargs["link_mbps"] = int(topo.get("link_mbps", 1000))
    catalog = data.get("catalog", "offshelf")
    kwargs["catalog"] = offshelf_catalog() if catalog == "offshelf" else io.load_catalog(base / catalog)
    chains = []
    for c in data.get("chains", [2]):
        if isinstance(c, int):
            if c not in CHAINS:
                raise InputError("schema", f"{path}: unknown chain template Len-{c}")
            chains.append(CHAINS[c])
        else:
            chains.append(tuple(c))
    for key in ("rate", "mean_lifetime", "epsilon", "exact_time_limit"):
        if key in data:
            kwargs[key] = float(data[key])
    for key in ("n_chains",):
        if key in data:
            kwargs[key] = int(data[key])
    if "exact_engine" in data:
        kwargs["exact_engine"] = data["exact_engine"]
    if "cost" in data:
        kwargs["cost"] = io.cost_from_dict(data["cost"])
    solvers = data.get("solvers", ["kariz"])
    out = []
    try:
        for solver in solvers:
            for sfs in chains:
                for demand in data.get("demands", [200]):
                    out.append(ExperimentConfig(sfs=sfs, demand=int(demand), solver=solver, **kwargs))
    except ValueError as exc:
        raise InputError("schema", f"{path}: {exc}") from None
    return out


def _cell_name(cfg: ExperimentConfig) -> str:
    return f"{cfg.solver}_len{len(cfg.sfs)}_d{cfg.demand}"


def _run_seed(config_path: str, seed: int, out_dir: str) -> list[dict]:
    # workers reload the config file so that nothing model-typed is pickled
    cells = load_experiment_config(config_path)
    rows = []
    chain_dir = Path(out_dir) / "chains"
    for cfg in cells:
        m = run_experiment(cfg.with_(seed=seed))
        write_chain_csv(m, chain_dir / f"{_cell_name(cfg)}_seed{seed}.csv")
        rows.append(m.summary())
    write_summary_csv(rows, Path(out_dir) / f"seed{seed}.csv")
    return rows


def aggregate(rows: list[dict]) -> list[dict]:
    """Arithmetic means over seeds per (solver, length, demand)."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["solver"], r["length"], r["demand"]), []).append(r)
    out = []
    for (solver, length, demand), rs in groups.items():
        row = {"solver": solver, "length": length, "demand": demand, "seeds": len(rs)}
        for col in SUMMARY_COLUMNS[5:]:
            row[col] = mean(r[col] for r in rs)
        out.append(row)
    return out


def ratio_table(agg: list[dict]) -> list[dict]:
    by = {(r["solver"], r["length"], r["demand"]): r for r in agg}
    out = []
    for (solver, length, demand), k in by.items():
        if solver != "kariz" or ("exact", length, demand) not in by:
            continue
        e = by[("exact", length, demand)]
        out.append({"length": length, "demand": demand, "seeds": k["seeds"],
                    "kariz_acceptance": k["acceptance_ratio"],
                    "exact_acceptance": e["acceptance_ratio"],
                    "acceptance_ratio": (k["acceptance_ratio"] / e["acceptance_ratio"]
                                         if e["acceptance_ratio"] else ""),
                    "kariz_mean_cost": k["mean_total_cost"], "exact_mean_cost": e["mean_total_cost"],
                    "cost_ratio": (k["mean_total_cost"] / e["mean_total_cost"]
                                   if e["mean_total_cost"] else "")})
    return out


def cmd_experiment(args) -> int:
    load_experiment_config(args.config)   # validate before any work starts
    out_dir = Path(args.out_dir)
    (out_dir / "chains").mkdir(parents=True, exist_ok=True)
    results, failed = {}, []
    if args.jobs > 1 and len(args.seeds) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {s: pool.submit(_run_seed, args.config, s, str(out_dir)) for s in args.seeds}
            for s, fut in futures.items():
                try:
                    results[s] = fut.result()
                except Exception:
                    failed.append((s, traceback.format_exc()))
    else:
        for s in args.seeds:
            try:
                results[s] = _run_seed(args.config, s, str(out_dir))
            except Exception:
                failed.append((s, traceback.format_exc()))
    for s, tb in failed:
        (out_dir / f"seed{s}.FAILED").write_text(tb)
        print(f"seed {s} failed; see {out_dir / f'seed{s}.FAILED'}", file=sys.stderr)
    if failed:
        (out_dir / "PARTIAL").write_text("some seeds failed; aggregate not written\n")
        return EXIT_ERROR
    rows = [r for s in args.seeds for r in results[s]]
    agg = aggregate(rows)
    write_summary_csv(agg, out_dir / "aggregate.csv", AGGREGATE_COLUMNS)
    ratios = ratio_table(agg)
    if ratios:
        write_summary_csv(ratios, out_dir / "ratios.csv", RATIO_COLUMNS)
    return EXIT_OK


def cmd_topology(args) -> int:
    profile = {"cpu": args.cpu}
    if args.mem is not None:
        profile["mem"] = args.mem
    net = generate_fat_tree(args.k, profile, args.link_mbps)
    _emit(io.network_to_dict(net), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"solve": cmd_solve, "experiment": cmd_experiment, "topology": cmd_topology}
    try:
        return handler[args.command](args)
    except InputError as exc:
        print(f"sfcplace: {exc.kind}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"sfcplace: io: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
