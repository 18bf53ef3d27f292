import json
import subprocess
import sys

import numpy as np
import pytest

from pfzeros.io import read_csv


def test_bell_files(run_cli):
    code, out, _ = run_cli("bell", "--map", "logistic", "--lambda", "4", "--n", "6")
    assert code == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == sorted([f"H_{k}.csv" for k in range(7)] + ["e_6.csv", "bell.json", "run_config.json"])
    header, rows = read_csv(out / "H_2.csv")
    assert header == ["degree", "numerator", "denominator"]
    assert [(int(r[1]), int(r[2])) for r in rows] == [(0, 1), (-8, 1), (16, 1)]


def test_bell_n0_and_resonance(run_cli):
    code, out, _ = run_cli("bell", "--n", "0")
    assert code == 0 and not list(out.glob("e_*.csv"))
    code, out, lines = run_cli("bell", "--lambda", "1", "--n", "3")
    assert code == 0 and any(l.get("warning") == "ResonanceWarning" for l in lines)
    code, out, lines = run_cli("bell", "--lambda", "1", "--n", "3", "--expect-resonance")
    assert not any("warning" in l for l in lines)


def test_exit_codes(run_cli):
    code, _, lines = run_cli("bell", "--lambda", "0.5")
    assert code == 2 and lines[0]["error"] == "DomainError"
    assert run_cli("bell", "--n", "x")[0] == 2
    assert run_cli("predict", "--map", "hermite", "--lambda", "1", "--n", "1", "--scheme", "n")[0] == 3


def test_flags_before_or_after_subcommand(run_cli, tmp_path):
    from pfzeros.cli import main
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--seed", "3", "bell", "--n", "2", "--out", str(a)]) == 0
    assert main(["bell", "--n", "2", "--seed", "3", "--out", str(b)]) == 0
    assert (a / "run_config.json").read_text() == (b / "run_config.json").read_text()


def test_config_merge(run_cli, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "bell", "options": {"n": 3, "lam": "2"}}))
    code, out, _ = run_cli("bell", "--config", cfg, "--n", "4")
    rc = json.loads((out / "run_config.json").read_text())
    assert code == 0 and rc["options"]["n"] == 4 and rc["options"]["lam"] == "2"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nope": 1}))
    assert run_cli("bell", "--config", bad)[0] == 2
    other = tmp_path / "other.json"
    other.write_text(json.dumps({"command": "henon", "options": {}}))
    assert run_cli("bell", "--config", other)[0] == 2


def test_predict_outputs(run_cli):
    code, out, _ = run_cli("predict", "--n", "30")
    assert code == 0
    for name in ("zeros.csv", "hist.csv", "q.csv", "p.csv", "provenance.json"):
        assert (out / name).exists()
    prov = json.loads((out / "provenance.json").read_text())
    assert prov["scheme"] == "2n+1" and prov["zeros"]["positive"] > 0


def test_descent_outputs(run_cli):
    code, out, _ = run_cli("descent", "--s", "1", "--map", "logistic")
    rep = json.loads((out / "descent.json").read_text())
    cp = rep["points"][0]["critical_points"]
    assert code == 0 and len(cp) == 2
    assert sorted(round(c["im"], 12) for c in cp) == [-0.25, 0.25]
    assert abs(rep["points"][0]["q"] - 1 / (2 * np.pi)) < 1e-12
    code, out, _ = run_cli("descent", "--s-grid", "0.01,1.99,50", "--kappa-draws", "200")
    assert code == 0 and (out / "kappa.csv").exists() and (out / "q.csv").exists()


def test_oracle_kinds(run_cli):
    assert run_cli("oracle", "--kind", "hermite", "--n", "10")[0] == 0
    assert run_cli("oracle", "--kind", "symbolic", "--n", "5")[0] == 0
    code, out, _ = run_cli("oracle", "--kind", "ulam", "--m", "50", "--subsamples", "8")
    assert code == 0 and (out / "ulam.csv").exists() and (out / "ulam_matrix.csv").exists()
    code, out, _ = run_cli("oracle", "--kind", "mc", "--samples", "20000", "--burn-in", "100", "--chains", "8")
    assert code == 0 and (out / "mc.csv").exists()


def test_lorenz_and_henon(run_cli):
    code, out, _ = run_cli("lorenz", "--samples", "2000")
    rep = json.loads((out / "lorenz.json").read_text())
    assert code == 0 and rep["max_residual"] < 1e-9 and rep["rejection_rate"] > 0
    header, _ = read_csv(out / "ovals.csv")
    assert header[-3:] == ["center_label", "branch_index", "on_route"]
    code, out, _ = run_cli("henon", "--samples", "1000", "--depth", "2")
    rep = json.loads((out / "henon.json").read_text())
    assert code == 0 and rep["branch_counts"] == [1000, 500, 333]


def test_compare_pass_and_fail(run_cli):
    code, out, _ = run_cli("oracle", "--kind", "ulam", "--m", "200", "--subsamples", "16")
    ulam = out / "ulam.csv"
    assert run_cli("compare", "--a", ulam, "--b", "closed:arcsine", "--l1-max", "0.05")[0] == 0
    code, out, _ = run_cli("compare", "--a", ulam, "--b", "closed:semicircle:0:1", "--l1-max", "0.05")
    rep = json.loads((out / "compare.json").read_text())
    assert code == 4 and not rep["passed"]
    assert run_cli("compare", "--a", ulam)[0] == 2


def test_compare_domination(run_cli):
    code, out, _ = run_cli("compare", "--domination", "--map", "hermite", "--lambda", "1",
                           "--map-b", "hermite", "--lambda-b", "1", "--offset-b", "0.5", "--s-grid", "0.1,2,8")
    rep = json.loads((out / "compare.json").read_text())
    assert code == 0 and rep["domination"]["wins_b"] == 8


def test_threads_do_not_change_output(run_cli):
    args = ("oracle", "--kind", "mc", "--samples", "40000", "--burn-in", "100", "--chains", "16")
    _, a, _ = run_cli(*args, "--threads", "1")
    _, b, _ = run_cli(*args, "--threads", "3")
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "pfzeros", "bell", "--n", "2", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and (tmp_path / "H_2.csv").exists()
