import json
import subprocess
import sys
from pathlib import Path

import pytest

from gfinterp.cli import CliError, main, parse_problem
from gfinterp.syntax import parse

DEMOS = Path(__file__).resolve().parents[1] / "demos"
PROBLEMS, STRUCTS = DEMOS / "problems", DEMOS / "structures"
ATM = Path(__file__).resolve().parents[1] / "src" / "gfinterp" / "data" / "atm2.txt"


def run(tmp_path, *args, name="report.json"):
    out = tmp_path / name
    code = main([*map(str, args), "--out", str(out)])
    return code, json.loads(out.read_text()) if out.exists() else None, out


def test_parse_problem_aliases_and_continuations():
    p = parse_problem("left: (A(x) &\n   B(x))  # comment\nright: A(x)\ntau: A/1, B\nfreevars: x\n")
    assert p.phi == parse("(A(x) & B(x))") and p.psi == parse("A(x)")
    assert p.tau == ("A", "B") and p.xs == ("x",)
    with pytest.raises(CliError):
        parse_problem("colour: red\n")
    with pytest.raises(CliError):
        parse_problem("phi: (A(x) &\n")


def test_interpolant_report_and_verification(tmp_path):
    code, rep, out = run(tmp_path, "interpolant", PROBLEMS / "odd_cycle.problem")
    assert code == 0 and rep["verdict"] == "NOT_EXISTS" and rep["schema"] == 1
    code, check, _ = run(tmp_path, "verify-cert", out, name="check.json")
    assert code == 0 and check["verdict"] == "VALID"


def test_tampered_report_fails_verification(tmp_path):
    _, rep, out = run(tmp_path, "interpolant", PROBLEMS / "odd_cycle.problem")
    rep["joint"]["tau"] = ["G", "R"]
    out.write_text(json.dumps(rep))
    code, check, _ = run(tmp_path, "verify-cert", out, name="check.json")
    assert code == 1 and check["verdict"] == "INVALID"


def test_reports_are_deterministic(tmp_path):
    _, _, a = run(tmp_path, "interpolant", PROBLEMS / "unary.problem", "--max-model-size", 3, name="a.json")
    _, _, b = run(tmp_path, "interpolant", PROBLEMS / "unary.problem", "--max-model-size", 3, name="b.json")
    assert a.read_bytes() == b.read_bytes()


def test_definability_commands(tmp_path):
    code, rep, _ = run(tmp_path, "definability", PROBLEMS / "copy.problem", "--max-model-size", 3)
    assert code == 0 and rep["verdict"] == "EXISTS"
    code, rep, _ = run(tmp_path, "definability", PROBLEMS / "triangle_definability.problem",
                       "--max-model-size", 3)
    assert code == 0 and rep["verdict"] == "NOT_EXISTS"


def test_bisim_command(tmp_path):
    code, rep, out = run(tmp_path, "bisim", STRUCTS / "triangle.txt", STRUCTS / "hexagon.txt", "--tau", "R")
    assert code == 0 and rep["verdict"] == "BISIMILAR"
    code, check, _ = run(tmp_path, "verify-cert", out, name="check.json")
    assert code == 0 and check["verdict"] == "VALID"
    code, rep, _ = run(tmp_path, "bisim", STRUCTS / "triangle.txt", STRUCTS / "hexagon.txt", "--tau", "R",
                       "--logic", "fo2")
    assert rep["verdict"] != "BISIMILAR"


def test_structure_commands(tmp_path):
    code, rep, _ = run(tmp_path, "readoff", PROBLEMS / "odd_cycle.problem", STRUCTS / "triangle.txt",
                       STRUCTS / "hexagon.txt", "--tau", "R")
    assert code == 0
    code, rep, _ = run(tmp_path, "shrink", STRUCTS / "cycle6.txt", STRUCTS / "two_triangles.txt", "--tau", "R")
    assert code == 0 and rep["verdict"] == "OK" and rep["violations"] == []
    code, rep, _ = run(tmp_path, "normalize", PROBLEMS / "ternary.problem")
    assert code == 0 and "reduced" in rep and rep["scott"]


def test_gen_hardness_writes_problem(tmp_path):
    target = tmp_path / "h.problem"
    code, rep, _ = run(tmp_path, "gen-hardness", ATM, "--variant", "fo2", "--n", 2, "--problem-out", target)
    assert code == 0 and rep["verdict"] == "GENERATED"
    p = parse_problem(target.read_text())
    assert p.logic == "fo2" and set(p.tau) == set(rep["tau"])


def test_errors_exit_one(tmp_path, capsys):
    assert main(["interpolant", str(tmp_path / "missing.problem")]) == 1
    assert "error" in capsys.readouterr().err
    bad = tmp_path / "bad.problem"
    bad.write_text("phi: E y . (A(x) & A(y))\npsi: A(x)\n")
    assert main(["interpolant", str(bad)]) == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "gfinterp.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "verify-cert" in r.stdout
