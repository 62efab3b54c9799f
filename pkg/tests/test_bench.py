import csv
import io
import json

import numpy as np
import pytest

from conekrylov.bench import BenchRecord, Instance, records_to_csv, records_to_json, run_bench
from conekrylov.cli import main
from conekrylov.errors import InvalidParams
from conekrylov.generate import random_dense_spd


@pytest.fixture
def analytic(d1, d2):
    return [Instance("D1", *d1), Instance("D2", *d2)]


def test_all_methods_on_analytic(analytic):
    recs = run_bench(analytic, workers=4)
    assert len(recs) == 8
    assert [(r.instance, r.method) for r in recs] == [
        (i, m) for i in ("D1", "D2") for m in ("rksm1", "rksm10", "newton", "oracle")
    ]
    assert all(r.outcome == "boundary_root" for r in recs)
    for r in recs:
        assert r.s_star == pytest.approx({"D1": 1.0 / 3.0, "D2": 6.0}[r.instance], rel=1e-7)


def test_oracle_cap_recorded_as_failure():
    big = Instance("big", np.eye(2100) * 2.0, -np.ones(2100))
    (rec,) = run_bench([big], ["oracle"])
    assert rec.outcome is None
    assert "n <= 2000" in rec.error


def test_ell_variants_agree(rng):
    M = random_dense_spd(80, 1e3, rng)
    from conekrylov.rksm import SolverOptions

    recs = run_bench([Instance("r", M, np.ones(80))], ["rksm1", "rksm10"],
                     SolverOptions(ell0=3, k0=3, eps1=1e-12, eps2=1e-12))
    a, b = recs
    assert a.outcome == b.outcome == "boundary_root"
    assert a.s_star == pytest.approx(b.s_star, rel=1e-8)
    assert a.iteration_kind == b.iteration_kind == "subspace_dim"
    assert b.iterations > a.iterations


def test_iteration_kinds_are_labelled(analytic):
    kinds = {r.method: r.iteration_kind for r in run_bench(analytic[:1])}
    assert kinds == {"rksm1": "subspace_dim", "rksm10": "subspace_dim", "newton": "h_evaluations",
                     "oracle": "pencil_dim"}


def test_unknown_method(analytic):
    with pytest.raises(InvalidParams):
        run_bench(analytic, ["cvx"])


def test_negative_chi_rejected():
    with pytest.raises(InvalidParams):
        BenchRecord("a", "rksm1", "boundary_root", 1, "subspace_dim", 0.0, -1.0, 1.0)


def test_serializers(analytic):
    recs = run_bench(analytic, ["rksm1"])
    rows = list(csv.DictReader(io.StringIO(records_to_csv(recs))))
    assert [r["instance"] for r in rows] == ["D1", "D2"]
    doc = json.loads(records_to_json(recs))
    assert doc["schema"] == 1 and len(doc["records"]) == 2


def test_cli_bench(tmp_path, capsys):
    (tmp_path / "d1.mtx").write_text("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n2 2 1\n")
    (tmp_path / "q1.txt").write_text("-1 -2\n")
    suite = {
        "instances": [
            {"id": "D1", "matrix": "d1.mtx", "q": "q1.txt"},
            {"id": "G", "matrix": "gen:n=60,density=0.1,rc=0.01,seed=2"},
        ],
        "options": {"ell0": 3, "k0": 3},
    }
    (tmp_path / "suite.json").write_text(json.dumps(suite))
    out = tmp_path / "res.csv"
    code = main(["bench", "--suite", str(tmp_path / "suite.json"), "--methods", "rksm1,oracle", "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert [(r["instance"], r["method"]) for r in rows] == [("D1", "rksm1"), ("D1", "oracle"), ("G", "rksm1"), ("G", "oracle")]
    assert rows[0]["outcome"] == "boundary_root"
