import dataclasses
from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sfcplace import io
from sfcplace.datasets import CHAINS, offshelf_catalog
from sfcplace.model import (FAMILIES, DEFAULT_COST, ChainRequest, CostModel, Deployment, InputError,
                            Link, Node, SubstrateNetwork, VnfCatalog, VnfType, feasibility_check,
                            total_cost, validate_inputs)
from sfcplace.simlab import generate_fat_tree

from oracles import evaluate_families, independent_cost


# ---------------------------------------------------------------- validation

def test_duplicate_node_rejected():
    with pytest.raises(InputError) as err:
        SubstrateNetwork([Node("a", {"cpu": 1}), Node("a", {"cpu": 2})], [])
    assert err.value.kind == "duplicate-node"


@pytest.mark.parametrize("links, kind", [
    ([Link("a", "a", 10)], "self-loop"),
    ([Link("a", "z", 10)], "unknown-node"),
    ([Link("a", "b", 10), Link("b", "a", 5)], "parallel-link"),
    ([Link("a", "b", -1)], "bad-bandwidth"),
])
def test_bad_links_rejected(links, kind):
    with pytest.raises(InputError) as err:
        SubstrateNetwork([Node("a", {"cpu": 1}), Node("b", {"cpu": 1})], links)
    assert err.value.kind == kind


def test_negative_capacity_rejected():
    with pytest.raises(InputError):
        SubstrateNetwork([Node("a", {"cpu": -1})], [])


def test_vnf_type_needs_positive_throughput():
    with pytest.raises(InputError):
        VnfType("x", 0, {"cpu": 1})


def test_validate_inputs_worked_setup():
    net = generate_fat_tree(6, {"cpu": 8}, 1000)
    hosts = [n for n in net.node_ids if n.startswith("host-")]
    req = ChainRequest(CHAINS[3], hosts[0], hosts[-1], 200)
    validate_inputs(net, req, offshelf_catalog())


def test_validate_inputs_missing_catalog(worked):
    net, cat, req, _ = worked
    with pytest.raises(InputError) as err:
        validate_inputs(net, dataclasses.replace(req, sfs=("IDS", "NAT")), cat)
    assert err.value.kind == "missing-catalog"


def test_validate_inputs_zero_demand(worked):
    net, cat, req, _ = worked
    with pytest.raises(InputError) as err:
        validate_inputs(net, dataclasses.replace(req, mbps=0), cat)
    assert err.value.kind == "invalid-demand"


def test_validate_inputs_unknown_endpoint(worked):
    net, cat, req, _ = worked
    with pytest.raises(InputError) as err:
        validate_inputs(net, dataclasses.replace(req, target="Z"), cat)
    assert err.value.kind == "unknown-node"


def test_negative_deployment_value_rejected():
    with pytest.raises(InputError):
        Deployment({(0, ("a", "b")): -1})


# ---------------------------------------------------------------- feasibility

def test_worked_deployment_is_feasible(worked):
    net, cat, req, dep = worked
    report = feasibility_check(net, req, cat, dep)
    assert report.feasible, str(report)
    assert set(report.families) == set(FAMILIES)


def test_worked_deployment_has_three_ids_instances(worked):
    _, _, _, dep = worked
    counts = {}
    for (m, j, u), c in dep.instances.items():
        if j == 1:
            counts[u] = counts.get(u, 0) + c
    assert counts == {"IDS1": 1, "IDS2": 2}


def test_reduced_allocation_breaks_demand(worked):
    net, cat, req, dep = worked
    bad = Deployment(dep.flows, dep.instances, {**dep.allocations, ("D", 1): 100})
    report = feasibility_check(net, req, cat, bad)
    assert not report.families["demand"].passed
    assert 1 in report.families["demand"].violations[0]


def test_link_overload_detected(worked):
    net, cat, req, dep = worked
    tight = net.with_capacities({}, {net.link_index("A", "D"): 100})
    report = feasibility_check(tight, req, cat, dep)
    assert report.failed() == ["link_capacity"]


def test_node_overload_detected(worked):
    net, cat, req, dep = worked
    small = net.with_capacities({"D": {"cpu": 1, "mem": 64}}, {})
    assert feasibility_check(small, req, cat, dep).failed() == ["node_capacity"]


def test_missing_instance_breaks_throughput(worked):
    net, cat, req, dep = worked
    inst = dict(dep.instances)
    del inst[("D", 1, "IDS1")]
    report = feasibility_check(net, req, cat, Deployment(dep.flows, inst, dep.allocations))
    assert report.failed() == ["throughput"]


def test_pseudo_instance_misplaced(worked):
    net, cat, req, dep = worked
    inst = {**dep.instances, ("B", 0, "@source"): 1}
    assert "location" in feasibility_check(net, req, cat, Deployment(dep.flows, inst, dep.allocations)).failed()


def test_unknown_link_in_flow(worked):
    net, cat, req, dep = worked
    with pytest.raises(InputError):
        feasibility_check(net, req, cat, Deployment({(0, ("A", "F")): 10}))


def _random_case(rng):
    n = int(rng.integers(2, 7))
    names = [f"v{i}" for i in range(n)]
    edges = {(int(rng.integers(0, i)), i) for i in range(1, n)}
    links = [Link(names[a], names[b], int(rng.integers(0, 6)) * 10) for a, b in sorted(edges)]
    nodes = [Node(m, {"cpu": int(rng.integers(0, 5))}) for m in names]
    net = SubstrateNetwork(nodes, links)
    k = int(rng.integers(1, 3))
    cat = VnfCatalog({f"s{j}": [VnfType(f"s{j}a", 10, {"cpu": 1}), VnfType(f"s{j}b", 30, {"cpu": 2})]
                      for j in range(k)})
    src, dst = (names[int(i)] for i in rng.choice(n, 2, replace=False))
    b = int(rng.integers(1, 4)) * 10
    req = ChainRequest(tuple(cat), src, dst, b)
    flows, inst, alloc = {}, {}, {}
    for j in range(k + 1):
        for l in links:
            for a, bb in ((l.a, l.b), (l.b, l.a)):
                if rng.random() < 0.3:
                    flows[(j, (a, bb))] = int(rng.integers(0, 4)) * 10
    for j in range(1, k + 1):
        for m in names:
            if rng.random() < 0.4:
                alloc[(m, j)] = int(rng.integers(0, 4)) * 10
            for v in cat[f"s{j - 1}"]:
                if rng.random() < 0.3:
                    inst[(m, j, v.name)] = int(rng.integers(0, 3))
    if rng.random() < 0.3:
        inst[(names[int(rng.integers(0, n))], 0, "@source")] = 1
    return net, cat, req, Deployment(flows, inst, alloc)


def test_checker_agrees_with_independent_evaluator():
    rng = np.random.default_rng(2024)
    disagreements = 0
    for _ in range(200):
        net, cat, req, dep = _random_case(rng)
        report = feasibility_check(net, req, cat, dep)
        oracle = evaluate_families(net, req, cat, dep)
        for fam in FAMILIES:
            disagreements += report.families[fam].passed != oracle[fam]
    assert disagreements == 0


def test_checker_agrees_on_solver_outputs(worked):
    from sfcplace import kariz
    net, cat, req, _ = worked
    dep = kariz.deploy(net, req, cat, DEFAULT_COST).deployment
    assert all(evaluate_families(net, req, cat, dep).values())


# ---------------------------------------------------------------- costs

def test_total_cost_single_instance():
    net = SubstrateNetwork([Node("a", {"cpu": 2}), Node("b", {"cpu": 0}), Node("c", {"cpu": 0})],
                           [Link("a", "b", 100), Link("b", "c", 100)])
    cat = VnfCatalog({"fw": [VnfType("fw1", 100, {"cpu": 1})]})
    req = ChainRequest(("fw",), "a", "c", 100)
    dep = Deployment({(1, ("a", "b")): 100, (1, ("b", "c")): 100}, {("a", 1, "fw1"): 1}, {("a", 1): 100})
    costs = total_cost(dep, DEFAULT_COST, req, cat)
    assert costs.as_decimal() == (Decimal("2.00"), Decimal("1.00"), Decimal("3.00"))
    assert feasibility_check(net, req, cat, dep).feasible


def test_total_cost_empty():
    assert tuple(total_cost(Deployment(), DEFAULT_COST)) == (0, 0, 0)


def test_worked_cost_matches_independent_sum(worked):
    net, cat, req, dep = worked
    costs = total_cost(dep, DEFAULT_COST, req, cat)
    assert Fraction(costs.total, 100) == independent_cost(dep, req, cat, {"cpu": 1}, 0.01)
    assert costs.total == 1150


def test_cost_resolution_enforced():
    with pytest.raises(InputError) as err:
        CostModel({"cpu": 1}, 0.001)
    assert err.value.kind == "cost-resolution"


def test_cost_with_memory_weight(worked):
    net, cat, req, dep = worked
    cost = CostModel({"cpu": 1, "mem": 0.04}, 0.01)
    assert Fraction(total_cost(dep, cost, req, cat).total, 100) == independent_cost(dep, req, cat, {"cpu": 1, "mem": 0.04}, 0.01)


@given(st.lists(st.tuples(st.integers(0, 3), st.sampled_from(["AB", "BA", "AD", "DC"]), st.integers(0, 200)),
                max_size=8),
       st.sampled_from([0, 0.01, 0.05, 1]))
def test_bandwidth_cost_is_linear(entries, beta):
    flows = {}
    for j, pair, v in entries:
        flows[(j, (pair[0], pair[1]))] = v
    dep = Deployment(flows)
    cost = CostModel({"cpu": 1}, beta)
    assert total_cost(dep, cost).bandwidth == cost.beta_cents * sum(flows.values())
    assert total_cost(dep, cost.scaled(2)).bandwidth == 2 * total_cost(dep, cost).bandwidth


# ---------------------------------------------------------------- io

def test_io_round_trip(worked):
    net, cat, req, dep = worked
    net2 = io.network_from_dict(io.network_to_dict(net))
    assert io.network_to_dict(net2) == io.network_to_dict(net)
    assert io.catalog_to_dict(io.catalog_from_dict(io.catalog_to_dict(cat))) == io.catalog_to_dict(cat)
    assert io.request_from_dict(io.request_to_dict(req)) == req
    assert io.deployment_from_dict(io.deployment_to_dict(dep, req)) == dep


def test_io_reports_parse_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"nodes": [\n  1,,\n]}')
    with pytest.raises(InputError) as err:
        io.load_network(p)
    assert err.value.kind == "parse"
    assert ":2:" in str(err.value)


def test_io_reports_missing_field(tmp_path):
    p = tmp_path / "net.json"
    p.write_text('{"resource_kinds": ["cpu"], "nodes": [{"id": "a"}], "links": []}')
    with pytest.raises(InputError) as err:
        io.load_network(p)
    assert "nodes[0]" in str(err.value) and "capacity" in str(err.value)
