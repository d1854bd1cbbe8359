import numpy as np
import pytest
from hypothesis import given, strategies as st

from sfcplace import kernels
from sfcplace.datasets import offshelf_catalog
from sfcplace.model import DEFAULT_COST, CostModel, VnfType
from sfcplace.packing import clear_caches, max_throughput, min_cost_instances

from oracles import enumerate_packings

CAT = offshelf_catalog()


def test_wan_opt_eight_cores():
    res = max_throughput({"cpu": 8}, CAT["WAN-opt"])
    assert res.achieved == 100 and res.counts == {"CCX1555M": 2}


def test_zero_residual():
    res = max_throughput({"cpu": 0}, CAT["Firewall"])
    assert res.achieved == 0 and res.counts == {}


def test_firewall_eight_cores_tie_break():
    res = max_throughput({"cpu": 8}, CAT["Firewall"])
    assert res.achieved == 800
    assert res.counts == {"Level10": 2}


def test_worked_host_d_packing(worked):
    _, cat, _, _ = worked
    res = min_cost_instances({"cpu": 8, "mem": 64}, 130, cat["IDS"])
    assert res.counts == {"IDS1": 1, "IDS2": 1}
    assert res.consumed["cpu"] == 2


def test_zero_demand_is_empty():
    res = min_cost_instances({"cpu": 8}, 0, CAT["Firewall"])
    assert res.counts == {} and res.host_cost == 0


def test_firewall_300():
    res = min_cost_instances({"cpu": 8}, 300, CAT["Firewall"])
    assert res.host_cost == 300 and res.achieved >= 300


def test_impossible_demand():
    assert min_cost_instances({"cpu": 1}, 300, CAT["Firewall"]) is None


def test_memory_limits_packing(worked):
    _, cat, _, _ = worked
    res = max_throughput({"cpu": 8, "mem": 64}, cat["IDS"])
    assert res.achieved == 160 and res.counts == {"IDS2": 2}


def _random_catalog(rng):
    kinds = ["cpu", "mem"][: int(rng.integers(1, 3))]
    types = []
    for t in range(int(rng.integers(1, 4))):
        demand = {r: int(rng.integers(1, 5)) for r in kinds}
        types.append(VnfType(f"t{t}", int(rng.integers(1, 31)) * 10, demand))
    residual = {r: int(rng.integers(0, 11)) for r in kinds}
    return residual, types


@pytest.mark.parametrize("impl", ["selected", "python"])
def test_packing_matches_enumeration(impl, monkeypatch):
    if impl == "python":
        monkeypatch.setattr(kernels, "packing_max", kernels.python_kernels.packing_max)
        monkeypatch.setattr(kernels, "packing_min_cost", kernels.python_kernels.packing_min_cost)
    clear_caches()
    rng = np.random.default_rng(5)
    for _ in range(200):
        residual, types = _random_catalog(rng)
        options = list(enumerate_packings(residual, types))
        cents = [DEFAULT_COST.host_cents(v) for v in types]
        best_mbps = max(m for _, m, _ in options)
        res = max_throughput(residual, types)
        assert res.achieved == best_mbps
        cheapest_at_max = min(sum(c * w for c, w in zip(cnt, cents)) for cnt, m, _ in options if m == best_mbps)
        assert res.host_cost == cheapest_at_max

        demand = int(rng.integers(0, best_mbps + 40))
        fits = [sum(c * w for c, w in zip(cnt, cents)) for cnt, m, _ in options if m >= demand]
        found = min_cost_instances(residual, demand, types)
        if fits:
            assert found is not None and found.host_cost == min(fits) and found.achieved >= demand
        else:
            assert found is None
        # duality: the maximum throughput can always be covered at minimum cost
        dual = min_cost_instances(residual, best_mbps, types)
        assert dual is not None and dual.achieved == best_mbps
    clear_caches()


@given(st.integers(0, 16), st.integers(0, 1200))
def test_min_cost_respects_capacity(cores, demand):
    res = min_cost_instances({"cpu": cores}, demand, CAT["Firewall"])
    if res is not None:
        assert res.consumed.get("cpu", 0) <= cores
        assert res.achieved >= demand
    else:
        assert max_throughput({"cpu": cores}, CAT["Firewall"]).achieved < demand


def test_cores_objective():
    res = min_cost_instances({"cpu": 8}, 300, CAT["Firewall"], CostModel({"cpu": 2}, 0.01), "cores")
    assert res.consumed["cpu"] == 3
    with pytest.raises(ValueError):
        min_cost_instances({"cpu": 8}, 300, CAT["Firewall"], DEFAULT_COST, "watts")
