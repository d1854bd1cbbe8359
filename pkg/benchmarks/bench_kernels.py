"""Compiled vs pure-Python kernels on the three hot paths.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each workload is run once per backend by swapping the functions that
``sfcplace.kernels`` exports; the results of both backends must agree.
"""

import argparse
import time

import numpy as np

from sfcplace import kernels
from sfcplace.datasets import offshelf_catalog, worked_example
from sfcplace.flow import Arc, FlowNetwork, InfeasibleFlowError, min_cost_flow
from sfcplace.linprog import build_milp, solve_milp
from sfcplace.model import DEFAULT_COST
from sfcplace.packing import clear_caches, max_throughput, min_cost_instances
from sfcplace.simlab.instances import random_small_instance

KERNELS = ("ssp_min_cost_flow", "packing_max", "packing_min_cost", "simplex_run", "simplex_pivot")


def use(backend):
    impl = kernels.python_kernels if backend == "python" else kernels._impl
    for name in KERNELS:
        setattr(kernels, name, getattr(impl, name))
    clear_caches()


def mcf_workload():
    rng = np.random.default_rng(1)
    out = []
    for _ in range(300):
        n = 40
        arcs = [Arc(int(a), int(b), int(rng.integers(10, 200)), int(rng.integers(1, 20)))
                for a, b in rng.integers(0, n, (220, 2)) if a != b]
        try:
            out.append(min_cost_flow(FlowNetwork(arcs), 0, n - 1, 150).cost)
        except InfeasibleFlowError as exc:
            out.append(-exc.max_flow)
    return out


def packing_workload():
    cat = offshelf_catalog()
    out = []
    for sf in cat:
        for cpu in range(0, 33):
            for mem in (8, 16, 32, 64):
                residual = {"cpu": cpu, "mem": mem}
                out.append(max_throughput(residual, cat[sf]).achieved)
                found = min_cost_instances(residual, 50 * (cpu % 9), cat[sf])
                out.append(found.host_cost if found else None)
    return out


def simplex_workload():
    net, cat, req, _ = worked_example()
    out = [solve_milp(build_milp(net, req, cat, DEFAULT_COST)).objective]
    for seed in range(40):
        inst = random_small_instance(seed)
        out.append(solve_milp(build_milp(inst.net, inst.req, inst.cat, inst.cost)).objective)
    return out


WORKLOADS = {"min-cost flow": mcf_workload, "packing": packing_workload, "simplex/B&B": simplex_workload}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        raise SystemExit("compiled kernels are not built; run `pip install --no-build-isolation -e .`")
    print(f"{'workload':<14}{'cython s':>10}{'python s':>10}{'speedup':>9}")
    for name, fn in WORKLOADS.items():
        best, results = {}, {}
        for backend in ("cython", "python"):
            use(backend)
            times = []
            for _ in range(args.repeat):
                clear_caches()
                t0 = time.perf_counter()
                results[backend] = fn()
                times.append(time.perf_counter() - t0)
            best[backend] = min(times)
        for x, y in zip(results["cython"], results["python"]):
            # LP objectives are floats; everything else is exact
            assert x == y or abs(x - y) <= 1e-6 * max(1.0, abs(x)), f"{name}: backends disagree"
        print(f"{name:<14}{best['cython']:>10.3f}{best['python']:>10.3f}"
              f"{best['python'] / best['cython']:>8.1f}x")
    use("cython")


if __name__ == "__main__":
    main()
