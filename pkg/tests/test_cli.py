import csv
import io
import json
import subprocess
import sys

import pytest

from engel.cli import dispatch


def run(argv, capsys):
    code = dispatch(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_unknown_flag(capsys):
    code, _, err = run(["dual", "--bogus"], capsys)
    assert code == 2 and "usage" in err


def test_missing_command(capsys):
    assert run([], capsys)[0] == 2


def test_bad_prime(capsys):
    code, _, err = run(["dual", "--p", "3"], capsys)
    assert code == 2 and "error" in err


def test_peter_weyl_level_two(capsys):
    code, out, _ = run(["peter-weyl", "--p", "5", "--level", "2"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["sum_d2"] == 390625 == 5 ** 8 and data["pass"]


def test_dual_csv(capsys):
    code, out, _ = run(["dual", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 49
    assert {r["case_tag"] for r in rows} == {"abelian", "heisenberg", "big_xi4"}
    assert any(r["xi3"] == "1/5^1" for r in rows)


def test_spectrum_csv_columns(capsys):
    code, out, _ = run(["spectrum", "--p", "5", "--level", "1", "--alpha", "1", "--format", "csv"], capsys)
    reader = csv.DictReader(io.StringIO(out))
    rows = list(reader)
    assert reader.fieldnames == ["case_tag", "xi1", "xi2", "xi3", "xi4", "hprime", "tau", "e1", "e2", "value", "multiplicity"]
    assert code == 0 and len(rows) == 625
    assert float(rows[0]["value"]) == 0
    # 17 significant digits
    assert any(len(r["value"].replace(".", "")) >= 16 for r in rows)


def test_gauss_check_csv(capsys):
    code, out, _ = run(["gauss-check", "--p", "5"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert list(rows[0]) == ["a", "b", "gamma", "branch", "analytic_re", "analytic_im", "oracle_re", "oracle_im", "abs_err"]
    assert max(float(r["abs_err"]) for r in rows) <= 1e-12


@pytest.mark.parametrize("cmd", ["ortho-check", "rep-check", "plancherel"])
def test_checks_pass(cmd, capsys):
    code, out, _ = run([cmd], capsys)
    assert code == 0 and json.loads(out)["pass"]


def test_vt_matrix_outputs(capsys):
    code, out, _ = run(["vt-matrix", "--dir", "sub", "--format", "csv"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("# ") and lines[1] == "row,col,re,im"
    header = json.loads(lines[0][2:])
    assert header["size"] == 625 and header["nnz"] == len(lines) - 2


def test_verify_spectrum_fails_honestly(capsys):
    code, out, _ = run(["verify-spectrum", "--p", "5", "--level", "1", "--alpha", "1"], capsys)
    rep = json.loads(out)
    assert code == 1 and rep["pass"] is False
    assert rep["orientation"]["passing"] == ["std:h_minus_hprime"]
    assert len(rep["literal_vs_piecewise"]) == 225


def test_ellipticity(capsys):
    code, out, _ = run(["ellipticity", "--level", "2", "--alpha", "2"], capsys)
    rep = json.loads(out)
    assert code == 0 and abs(rep["exponent_fit"] - 2) < 0.1 and rep["gap"] > 0


def test_capacity_exit(capsys, monkeypatch):
    code, _, err = run(["plancherel", "--p", "7", "--level", "2"], capsys)
    assert code == 2 and "capacity" in err
    monkeypatch.setenv("ENGEL_BUDGET_DIM", "100")
    code, _, err = run(["vt-matrix", "--dir", "full"], capsys)
    assert code == 2 and "capacity" in err


def test_level_zero_usage(capsys):
    assert run(["vt-matrix", "--level", "0"], capsys)[0] == 2


def test_deterministic_outputs_and_manifest(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert dispatch(["spectrum", "--alpha", "0.5", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert dispatch(["rep-check", "--seed", "3", "--out", str(tmp_path / "r1.json")]) == 0
    assert dispatch(["rep-check", "--seed", "3", "--out", str(tmp_path / "r2.json")]) == 0
    assert (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes()
    records = [json.loads(x) for x in (tmp_path / "run_manifest.jsonl").read_text().splitlines()]
    listed = [o for r in records for o in r["outputs"]]
    assert sorted(listed) == sorted(str(tmp_path / f) for f in ("a.csv", "b.csv", "r1.json", "r2.json"))
    for r in records:
        assert {"command", "config", "started", "finished", "outputs", "pass"} <= set(r)
    assert capsys.readouterr().out == ""


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "engel.cli", "dual", "--level", "0"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)[0]["case_tag"] == "abelian"
