import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from taufay import cli_report as cr


def test_defaults_validate():
    assert cr.validate_config({}) == []
    cfg = cr.effective_config({}, seed=3)
    assert cfg["seed"] == 3 and cfg["schema_version"] == cr.SCHEMA_VERSION
    for name in cr.SUITES:
        assert cfg[name] == cr.DEFAULTS[name]


def test_errors_carry_json_pointers():
    errs = cr.validate_config({"theta_props": {"taus": [{"re": "x"}], "tolerance": -1}, "nope": 1})
    joined = "\n".join(errs)
    assert "/theta_props/taus/0/re:" in joined
    assert "/theta_props/tolerance:" in joined
    assert "/:" in joined and "nope" in joined


@given(st.floats(1e-15, 1e-3))
def test_overrides_are_echoed(tol):
    cfg = cr.effective_config({"fay_genus0": {"tolerance": tol}})
    assert cfg["fay_genus0"]["tolerance"] == tol
    assert cfg["fay_genus0"]["samples"] == cr.DEFAULTS["fay_genus0"]["samples"]


def test_unknown_and_empty_suite():
    with pytest.raises(cr.ConfigError):
        cr.run({}, "")
    with pytest.raises(cr.ConfigError):
        cr.run({}, "nonsense")


def test_run_report_shape_and_determinism():
    r1, t1 = cr.run({"fay_genus0": {"samples": 3}}, "fay_genus0", seed=5, jobs=3)
    r2, _ = cr.run({"fay_genus0": {"samples": 3}}, "fay_genus0", seed=5, jobs=1)
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)
    assert r1["schema_version"] == cr.SCHEMA_VERSION and r1["passed"]
    ids = [rec["id"] for rec in r1["records"]]
    assert ids == sorted(ids) and set(t1) == set(ids)
    for rec in r1["records"]:
        assert set(rec) >= {"id", "anchor", "inputs", "residual", "tolerance", "passed", "kind"}
    assert r1["config"]["fay_genus0"]["samples"] == 3


def test_seed_changes_inputs():
    a, _ = cr.run({"fay_genus0": {"samples": 1}}, "fay_genus0", seed=1)
    b, _ = cr.run({"fay_genus0": {"samples": 1}}, "fay_genus0", seed=2)
    pick = lambda rep: next(r["inputs"] for r in rep["records"] if "cauchy_n2" in r["id"])
    assert pick(a) != pick(b)


def test_info_records_do_not_fail_a_run():
    rep, _ = cr.run({}, "hirota_ops")
    info = [r for r in rep["records"] if r["kind"] == "info"]
    assert info and not any(r["passed"] for r in info)
    assert rep["passed"]


def test_failing_check_sets_exit_status(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"airy_shift": {"series_tolerance": 0.0}}))
    code = cr.main(["run", "--suite", "airy_shift", "--config", str(cfg), "--out", str(tmp_path / "o")])
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert code == 1 and not rep["passed"] and rep["n_failed"] == 1


def test_cli_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    assert cr.main(["run", "--suite", "hirota_ops", "--out", str(out), "--seed", "1"]) == 0
    for name in ("report.json", "report.csv", "timings.json", "plot_hirota_ops.csv"):
        assert (out / name).exists()
    assert "runtime" not in (out / "report.json").read_text()
    assert cr.main(["plot", "--report", str(out / "report.json"), "--suite", "hirota_ops"]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "id"


def test_cli_usage_errors(tmp_path, capsys):
    assert cr.main(["run", "--suite", "", "--out", str(tmp_path)]) == 2
    assert "usage" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text('{"airy_shift": {"k_max": 0}}')
    assert cr.main(["run", "--suite", "airy_shift", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "/airy_shift/k_max" in capsys.readouterr().err


def test_plot_data_contract():
    assert cr.plot_data({"records": [], "plot_data": {}}, "anything") == "id\n"
    rep = {"records": [{}], "plot_data": {"theta_props": {"header": ["r", "d"], "rows": [[1, 0.5]]}}}
    assert cr.plot_data(rep, "theta_props") == "r,d\n1,0.5\n"
    with pytest.raises(KeyError):
        cr.plot_data(rep, "airy_shift")


def test_partitions_cover_weight():
    mus = cr._partitions_upto(6)
    assert len(mus) == len(set(mus)) == 30      # p(0) + ... + p(6)
    assert all(sum((j + 1) * m for j, m in enumerate(mu)) <= 6 for mu in mus)
