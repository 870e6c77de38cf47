import subprocess
import sys

import pytest

from eapr.cli import EX_DATAERR, EX_NO, EX_NOINPUT, EX_OK, EX_UNKNOWN, EX_USAGE, main
from eapr.semantics import evaluate, load_model

from conftest import P

HALF = "Pr_ob(q) -> !Pr_ob(q)\n!Pr_ob(q) -> Pr_ob(q)\nPr_ob(q) -> Pr_ob(K_A p)\n"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_round_trip(capsys):
    code, out, _ = run(capsys, "parse", "Pr_A([a]p & ~q) -> Kd_B c(1/3)")
    assert code == EX_OK
    assert run(capsys, "parse", out.strip())[1] == out


def test_sat_witness_evaluates(capsys, tmp_path):
    w = tmp_path / "m.json"
    code, out, _ = run(capsys, "sat", "Pr_A(<a>p) (.) !Pr_A(p)", "--witness", str(w))
    assert (code, out.strip()) == (EX_OK, "SAT")
    m = load_model(str(w))
    assert evaluate(P("Pr_A(<a>p) (.) !Pr_A(p)"), m, "0") == 1


def test_unsat_and_prove(capsys, tmp_path):
    assert run(capsys, "sat", "Pr_A(p) (.) !Pr_A(p)")[:2] == (EX_NO, "UNSAT\n")
    assert run(capsys, "prove", "D<a>Pr_A(p) -> <a>Pr_A(p)")[:2] == (EX_OK, "proved\n")
    w = tmp_path / "c.json"
    code, out, _ = run(capsys, "prove", "K_A p -> [a]p", "--witness", str(w))
    assert (code, out.strip()) == (EX_NO, "countermodel")
    code, out, _ = run(capsys, "eval", "--model", str(w), "--formula", "K_A p -> [a]p", "--world", "0")
    assert code == EX_OK and out.strip() != "1"


def test_prove_trace(capsys):
    code, out, _ = run(capsys, "prove", "p -> p", "--trace")
    assert code == EX_OK and len(out.splitlines()) > 1


def test_entails(capsys):
    assert run(capsys, "entails", "Pr_A(p)", "--goal", "Pr_A(~(~p & ~q))")[:2] == (EX_OK, "true\n")
    assert run(capsys, "entails", "Pr_A(p)", "--goal", "Pr_A(q)")[:2] == (EX_NO, "false\n")


def test_fragment_mode(capsys, tmp_path):
    f = tmp_path / "t.txt"
    f.write_text("# half\n" + HALF)
    code, out, _ = run(capsys, "sat", "--file", str(f), "--mode", "fragment", "-v")
    assert code == EX_OK and out.startswith("SAT\n# solver: fragment (UPR)")
    assert run(capsys, "classify", "--file", str(f))[1] == "UPR\n"
    assert run(capsys, "sat", "Pr_A(p) * Pr_A(q)", "--mode", "fragment")[0] == EX_USAGE


def test_classify_rendering(capsys):
    code, out, _ = run(capsys, "classify", "<a>!Pr_A(p)")
    assert code == EX_OK and out == "UPR_rule (proper)  [a]Pr_A(p) -> c(0)\n"


def test_oracle(capsys):
    assert run(capsys, "oracle", "Pr_A(p)", "--outer", "1", "--inner", "1", "--grid", "1")[0] == EX_OK
    code, out, _ = run(capsys, "oracle", "Pr_A(p) (.) !Pr_A(p)", "--outer", "1", "--inner", "1", "--grid", "2")
    assert code == EX_UNKNOWN and out.startswith("NO_WITNESS_FOUND")


def test_error_codes(capsys, tmp_path):
    assert run(capsys, "sat", "Pr_A(p")[0] == EX_DATAERR
    assert run(capsys, "sat", "--file", str(tmp_path / "missing.txt"))[0] == EX_NOINPUT
    assert run(capsys, "classify")[0] == EX_USAGE
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == EX_USAGE


def test_selftest(capsys):
    code, out, _ = run(capsys, "--jobs", "2", "selftest", "--random", "5")
    assert code == EX_OK and out.splitlines()[-1].endswith(" 0 failed")


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "eapr", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("eapr ")
