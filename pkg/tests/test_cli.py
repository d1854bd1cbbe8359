import csv
import json
from collections import defaultdict
from decimal import Decimal

import pytest

from sfcplace import cli
from sfcplace.datasets import data_path
from sfcplace.io import deployment_from_dict, load_catalog, load_network, load_request
from sfcplace.model import feasibility_check

from oracles import read_mps

NET, CAT, REQ = (str(data_path(f"worked_{n}.json")) for n in ("network", "catalog", "request"))


def run_solve(tmp_path, *extra, request=REQ):
    out = tmp_path / "out.json"
    code = cli.main(["solve", NET, CAT, request, "--out", str(out), *extra])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_solve_worked_exact(tmp_path):
    code, out = run_solve(tmp_path, "--solver", "exact")
    assert code == cli.EXIT_OK and out["accepted"] and out["feasibility"]["feasible"]
    per_layer = defaultdict(int)
    for a in out["deployment"]["allocations"]:
        per_layer[a["layer"]] += a["mbps"]
    assert dict(per_layer) == {1: 210, 2: 210}
    dep = deployment_from_dict(out["deployment"])
    assert feasibility_check(load_network(NET), load_request(REQ), load_catalog(CAT), dep).feasible


def test_kariz_not_cheaper_than_exact(tmp_path):
    _, exact = run_solve(tmp_path, "--solver", "exact")
    code, heur = run_solve(tmp_path, "--solver", "kariz")
    assert code == cli.EXIT_OK
    assert Decimal(heur["costs"]["total"]) >= Decimal(exact["costs"]["total"])


@pytest.mark.parametrize("solver", ["kariz", "exact"])
def test_demand_above_source_bandwidth_is_rejected(tmp_path, solver):
    req = json.loads(open(REQ).read())
    req["mbps"] = 300                      # A has two 130 Mbps links
    path = tmp_path / "big.json"
    path.write_text(json.dumps(req))
    code, out = run_solve(tmp_path, "--solver", solver, request=str(path))
    assert code == cli.EXIT_REJECTED
    assert out["accepted"] is False and out["reason"]


def test_highs_engine_agrees(tmp_path):
    _, bnb = run_solve(tmp_path, "--solver", "exact")
    _, highs = run_solve(tmp_path, "--solver", "exact", "--engine", "highs")
    assert bnb["costs"]["total"] == highs["costs"]["total"]


def test_mps_dump(tmp_path):
    mps = tmp_path / "model.mps"
    code, _ = run_solve(tmp_path, "--solver", "exact", "--mps", str(mps))
    assert code == cli.EXIT_OK
    c, A, senses, b, lb, ub, integer, cols = read_mps(mps.read_text())
    assert len(cols) == len(c) and integer


@pytest.mark.parametrize("argv", [
    [],
    ["solve", NET, CAT],
    ["solve", NET, CAT, REQ, "--solver", "greedy"],
    ["solve", NET, CAT, REQ, "--epsilon", "-3"],
    ["experiment", "cfg.json"],
    ["experiment", "cfg.json", "--out-dir", "x", "--seeds", "1,a"],
    ["topology"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as err:
        cli.main(argv)
    assert err.value.code == cli.EXIT_ERROR


def test_malformed_inputs(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["solve", str(bad), CAT, REQ]) == cli.EXIT_ERROR
    assert cli.main(["solve", NET, CAT, str(tmp_path / "missing.json")]) == cli.EXIT_ERROR
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"sfs": ["IDS"], "source": "A", "target": "Z", "mbps": 10}))
    assert cli.main(["solve", NET, CAT, str(wrong)]) == cli.EXIT_ERROR
    assert "sfcplace:" in capsys.readouterr().err


def test_topology(tmp_path):
    out = tmp_path / "ft.json"
    assert cli.main(["topology", "--k", "6", "--mem", "32", "--out", str(out)]) == cli.EXIT_OK
    data = json.loads(out.read_text())
    assert len(data["nodes"]) == 99 and len(data["links"]) == 162
    host = next(n for n in data["nodes"] if n["id"].startswith("host-"))
    assert host["capacity"] == {"cpu": 8, "mem": 32}
    assert cli.main(["topology", "--k", "5"]) == cli.EXIT_ERROR


def small_config(tmp_path, **extra):
    cfg = {"topology": {"k": 4}, "chains": [1, 2], "demands": [200], "n_chains": 10,
           "solvers": ["kariz", "exact"], **extra}
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(cfg))
    return path


def _tree(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_experiment_outputs_are_byte_identical(tmp_path):
    cfg = small_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["experiment", str(cfg), "--seeds", "3", "--out-dir", str(a)]) == cli.EXIT_OK
    assert cli.main(["experiment", str(cfg), "--seeds", "3", "--out-dir", str(b)]) == cli.EXIT_OK
    ta, tb = _tree(a), _tree(b)
    assert ta == tb
    assert {str(p) for p in ta} >= {"seed3.csv", "aggregate.csv", "ratios.csv",
                                    "chains/kariz_len1_d200_seed3.csv", "chains/exact_len2_d200_seed3.csv"}


def test_ratio_table_matches_chain_logs(tmp_path):
    cfg = small_config(tmp_path)
    out = tmp_path / "o"
    assert cli.main(["experiment", str(cfg), "--seeds", "0,1", "--out-dir", str(out),
                     "--jobs", "2"]) == cli.EXIT_OK
    with open(out / "ratios.csv", newline="") as fh:
        ratios = list(csv.DictReader(fh))
    assert len(ratios) == 2
    for row in ratios:
        acc = {}
        for solver in ("kariz", "exact"):
            per_seed = []
            for seed in (0, 1):
                path = out / "chains" / f"{solver}_len{row['length']}_d{row['demand']}_seed{seed}.csv"
                with open(path, newline="") as fh:
                    chains = list(csv.DictReader(fh))
                per_seed.append(sum(int(c["accepted"]) for c in chains) / len(chains))
            acc[solver] = sum(per_seed) / 2
        assert float(row["kariz_acceptance"]) == pytest.approx(acc["kariz"])
        assert float(row["exact_acceptance"]) == pytest.approx(acc["exact"])
        if acc["exact"]:
            assert float(row["acceptance_ratio"]) == pytest.approx(acc["kariz"] / acc["exact"])


def test_experiment_bad_config(tmp_path):
    cfg = small_config(tmp_path, chains=[9])
    assert cli.main(["experiment", str(cfg), "--out-dir", str(tmp_path / "o")]) == cli.EXIT_ERROR


def test_failed_seed_flags_partial(tmp_path, monkeypatch):
    cfg = small_config(tmp_path, solvers=["kariz"], chains=[1])
    real = cli.run_experiment

    def flaky(c):
        if c.seed == 1:
            raise RuntimeError("boom")
        return real(c)

    monkeypatch.setattr(cli, "run_experiment", flaky)
    out = tmp_path / "o"
    assert cli.main(["experiment", str(cfg), "--seeds", "0,1", "--out-dir", str(out)]) == cli.EXIT_ERROR
    assert (out / "PARTIAL").exists() and "boom" in (out / "seed1.FAILED").read_text()
    assert (out / "seed0.csv").exists() and not (out / "aggregate.csv").exists()
