import json
import shutil
import subprocess

import numpy as np
import pytest

from pencilkit.catalog import DOUBLE_POLE_COEFFS
from pencilkit.cli import main, parse_annulus, parse_complex
from pencilkit.io import dumps, matrix_from_json, pencil_to_json, poly_to_json
from pencilkit.polynomial import PolynomialPencil


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, json.loads(out), err


def test_solve_named(capsys):
    code, rep, err = run(capsys, "solve", "--pencil", "name:double-pole")
    assert code == 0 and rep["exit_status"] == 0
    assert rep["outputs"]["order"] == 2
    coeffs = rep["outputs"]["solution"]["coeffs"]
    for got, want in zip(coeffs, DOUBLE_POLE_COEFFS):
        assert np.max(np.abs(matrix_from_json(got) - want)) < 1e-10
    assert rep["verification"]["all_pass"]
    assert len(rep["inputs_digest"]) == 64 and "pole order 2" in err


def test_solve_from_file(capsys, tmp_path, ex3):
    path = tmp_path / "p.json"
    path.write_text(dumps(pencil_to_json(ex3)))
    code, rep, _ = run(capsys, "solve", "--pencil", str(path), "--center=-1,0", "--quiet")
    assert code == 0 and rep["outputs"]["order"] == 1


def test_out_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        run(capsys, "spectrum", "--pencil", "name:three-pole", "--out", str(p), "--quiet")
    assert a.read_bytes() == b.read_bytes()
    assert "timing" not in json.loads(a.read_text())


def test_spectrum(capsys):
    code, rep, err = run(capsys, "spectrum", "--pencil", "name:three-pole")
    zs = sorted(round(p["z"][0]) for p in rep["outputs"]["singularities"]["points"])
    assert code == 0 and zs == [-3, -1, 0]


def test_expand_regions_and_bracketing(capsys):
    code, rep, _ = run(capsys, "expand", "--pencil", "name:three-pole", "--annulus", "1:3")
    assert code == 0
    code, rep, _ = run(capsys, "expand", "--pencil", "name:three-pole", "--annulus", "0.5:2")
    assert code == 3 and rep["error"]["stage"] == "annulus expansion"


def test_verify_roundtrip_and_tamper(capsys, tmp_path):
    out = tmp_path / "sol.json"
    run(capsys, "solve", "--pencil", "name:double-pole", "--out", str(out), "--quiet")
    code, rep, _ = run(capsys, "verify", "--pencil", "name:double-pole", "--solution", str(out))
    assert code == 0 and rep["verification"]["all_pass"]
    report = json.loads(out.read_text())
    report["outputs"]["solution"]["coeffs"][2]["data"][0][0] += 1e-3
    out.write_text(dumps(report))
    code, rep, _ = run(capsys, "verify", "--pencil", "name:double-pole", "--solution", str(out))
    assert code == 4 and rep["exit_status"] == 4


def test_markov(capsys, tmp_path):
    code, rep, _ = run(capsys, "markov", "--r", "2", "--epsilon", "0.5")
    assert code == 0 and rep["outputs"]["order"] == 1
    csv = tmp_path / "chain.csv"
    csv.write_text("1,0\n0.5,0.5\n")
    code, rep, _ = run(capsys, "markov", "--csv", str(csv))
    assert code == 0
    csv.write_text("0,1\n1,0\n")
    code, rep, _ = run(capsys, "markov", "--csv", str(csv))
    assert code == 3 and rep["error"]["stage"] == "chain pencil"
    csv.write_text("1,0\n0.4,0.4\n")
    code, rep, _ = run(capsys, "markov", "--csv", str(csv))
    assert code == 2 and "row 2" in rep["error"]["message"]


def test_poly(capsys, tmp_path):
    path = tmp_path / "q.json"
    pp = PolynomialPencil((np.array([[2.0]]), np.array([[-3.0]]), np.array([[1.0]])))
    path.write_text(dumps(poly_to_json(pp)))
    code, rep, _ = run(capsys, "poly", "--poly", str(path), "--center", "1")
    assert code == 0
    assert matrix_from_json(rep["outputs"]["basic"]["-1"])[0, 0] == pytest.approx(-1)


def test_oracle(capsys):
    code, rep, _ = run(capsys, "oracle", "--pencil", "name:three-pole", "--rho", "0.5")
    assert code == 0 and rep["outputs"]["solver_difference"] < 1e-8


def test_essential_limit_reported(capsys):
    code, rep, _ = run(capsys, "solve", "--pencil", "name:weighted-shift", "--max-order", "3")
    assert code == 3 and "essential" in rep["error"]["message"]


def test_input_errors(capsys, tmp_path):
    code, rep, _ = run(capsys, "solve", "--pencil", str(tmp_path / "none.json"))
    assert code == 2 and rep["error"]["stage"] == "read pencil"
    code, rep, _ = run(capsys, "solve", "--pencil", "name:nope")
    assert code == 2
    assert main(["solve"]) == 2
    assert main(["solve", "--pencil", "name:identity", "--tol", "-1"]) == 2
    capsys.readouterr()


def test_argument_parsers():
    assert parse_complex("1,-2") == 1 - 2j and parse_complex("3") == 3
    assert parse_annulus("3:inf") == (3.0, float("inf"))
    with pytest.raises(Exception):
        parse_complex("a,b,c")


@pytest.mark.skipif(shutil.which("pencilkit") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["pencilkit", "solve", "--pencil", "name:identity", "--quiet"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["outputs"]["order"] == 0
