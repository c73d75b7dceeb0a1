from __future__ import annotations

import json
import re
import shutil
import subprocess
import sys

import pytest

from qrt.cli import main
from qrt.syntax import ast_equal, parse, print_program

from conftest import CORPUS, load, source

SPLIT = "0..3:PerformQuantumOperations,4..6:MeasureAndDisplayResult"


@pytest.fixture
def work(tmp_path):
    """Copies of the corpus in a scratch directory."""
    for p in CORPUS.glob("*.qs"):
        shutil.copy(p, tmp_path / p.name)
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# ---------------------------------------------------------------------- list


def test_list_text(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    assert "split-operation" in out and "[Split Operation]" in out


def test_list_json(capsys):
    code, out, _ = run(capsys, "list", "--json")
    data = json.loads(out)
    assert code == 0 and len(data) == 19
    assert [d["name"] for d in data] == sorted(d["name"] for d in data)
    assert len({row for d in data for row in d["rows"]}) == 25


# --------------------------------------------------------------------- apply


def test_apply_split_simulation(capsys, work):
    f = work / "simulation_before.qs"
    code, out, err = run(capsys, "apply", "--refactoring", "split-operation",
                         "--target", "MyNamespace.PerformQuantumSimulation", "--split", SPLIT, f)
    assert code == 0
    assert out.startswith("--- a/simulation_before.qs\n+++ b/simulation_before.qs\n")
    assert "+    operation MeasureAndDisplayResult(qubits : Qubit[], iteration : Int) : Unit {" in out
    assert "split MyNamespace.PerformQuantumSimulation" in err
    assert f.read_text() == source("simulation_before.qs")


def test_apply_write_produces_after_fixture(capsys, work):
    f = work / "simulation_before.qs"
    code, _, _ = run(capsys, "apply", "-r", "split-operation", "-t", "MyNamespace.PerformQuantumSimulation",
                     "--split", SPLIT, "--write", f)
    assert code == 0
    assert ast_equal(parse(f.read_text()), load("simulation_after.qs"))
    assert not list(work.glob(".qrt-*"))


def test_apply_full_and_json(capsys, work):
    f = work / "hello_world.qs"
    args = ["apply", "-r", "rename", "-t", "MyNamespace.HelloWorld.result", "-a", "new_name=outcome", f]
    code, out, _ = run(capsys, *args, "--full")
    assert code == 0 and "let outcome = M(qubit);" in out and not out.startswith("---")
    code, out, _ = run(capsys, "--json", *args)
    data = json.loads(out)
    assert data["ok"] and data["verdict"]["verdict"] == "Equivalent" and data["diff"].startswith("---")


def test_apply_request_document(capsys, work, monkeypatch):
    f = work / "hello_world.qs"
    doc = [
        {"refactoring": "rename", "target": "MyNamespace.HelloWorld.result", "args": {"newName": "outcome"}},
        {"refactoring": "inline", "target": "MyNamespace.MultiplyByTwo", "args": {}},
    ]
    req = work / "req.json"
    req.write_text(json.dumps(doc))
    code, out, err = run(capsys, "apply", "--request", req, "--full", f)
    assert code == 0
    assert "let multipliedResult = 2 * resultAsInt;" in out and "{outcome}" in out
    monkeypatch.setattr("sys.stdin", __import__("io").StringIO(json.dumps(doc[0])))
    code, out, _ = run(capsys, "apply", "--request", "-", f)
    assert code == 0 and "+                let outcome = M(qubit);" in out


PRECONDITION_FAILURES = [
    ("hello_world.qs", ["-r", "rename", "-t", "MyNamespace.HelloWorld.result", "-a", "new_name=entanglementResult"]),
    ("hello_world.qs", ["-r", "rename", "-t", "MyNamespace.HelloWorld.result"]),
    ("hello_world.qs", ["-r", "consolidate-measurements", "-t", "MyNamespace.HelloWorld:1.1.1"]),
    ("hello_world.qs", ["-r", "nonexistent", "-t", "MyNamespace.HelloWorld"]),
    ("hello_world.qs", ["-r", "inline", "-t", "MyNamespace.Nothing"]),
    ("simulation_before.qs", ["-r", "change-signature", "-t", "MyNamespace.PerformQuantumSimulation",
                        "-a", "remove=iterations"]),
    ("simulation_before.qs", ["-r", "split-operation", "-t", "MyNamespace.PerformQuantumSimulation",
                        "--split", "0..3:A1,2..6:B1"]),
    ("simulation_before.qs", ["-r", "remove-unused", "-t", "MyNamespace.Main"]),
    ("simulation_before.qs", ["-r", "extract-function", "-t", "MyNamespace.PerformQuantumSimulation:0.0..0.1"]),
    ("loops.qs", ["-r", "roll-loop", "-t", "Corpus.Loops.Main:0"]),
    ("gate_pairs.qs", ["-r", "replace-gate", "-t", "Corpus.Gates.Main:0.0", "-a", "rule=Nope"]),
    ("simulation_before.qs", ["-r", "rename"]),
]


@pytest.mark.parametrize("name,args", PRECONDITION_FAILURES)
def test_precondition_failure_leaves_file_untouched(capsys, work, name, args):
    f = work / name
    before = f.read_bytes()
    code, out, err = run(capsys, "apply", *args, "--write", f)
    assert code == 2
    assert out == ""
    assert "error[E_PRECONDITION]" in err
    assert f.read_bytes() == before
    assert sorted(p.name for p in work.iterdir()) == sorted(p.name for p in CORPUS.glob("*.qs"))


def test_apply_input_errors(capsys, work):
    bad = work / "bad.qs"
    bad.write_text("namespace A { operation Main() : Unit { H(q) } }")
    code, out, err = run(capsys, "apply", "-r", "rename", "-t", "A.Main", "-a", "new_name=B", bad)
    assert code == 4 and out == ""
    assert err.startswith(f"{bad}:1:")
    unresolved = work / "unresolved.qs"
    unresolved.write_text("namespace A { operation Main() : Unit { Foo(); } }")
    code, _, err = run(capsys, "apply", "-r", "rename", "-t", "A.Main", "-a", "new_name=B", unresolved)
    assert code == 4 and "E_UNRESOLVED" in err
    code, _, err = run(capsys, "apply", "-r", "rename", "-t", "A.Main", work / "missing.qs")
    assert code == 4 and "E_IO" in err


def test_apply_inconclusive(capsys, work):
    f = work / "ghz3.qs"
    code, _, err = run(capsys, "apply", "--max-qubits", "1", "-r", "rename", "-t", "Corpus.Ghz.Main.register",
                       "-a", "new_name=reg", f)
    assert code == 5 and "Inconclusive" in err


def test_no_verify_then_check_catches_it(capsys, work):
    # a hand-written "refactoring" that breaks behaviour goes through with --no-verify
    original = work / "bell_pair.qs"
    broken = work / "broken.qs"
    text = original.read_text()
    broken.write_text(text.replace("H(", "X(", 1))
    code, _, _ = run(capsys, "apply", "--no-verify", "-r", "merge-gates", "-t", first_callable(broken), broken)
    assert code == 0
    code, out, _ = run(capsys, "check", original, broken)
    assert code == 3 and "Inequivalent" in out and "trace" in out


def first_callable(path) -> str:
    program = parse(path.read_text())
    ns, c = next(iter(program.callables()))
    return f"{ns.name}.{c.name}"


# --------------------------------------------------------------------- check


def test_check_simulation(capsys):
    code, out, _ = run(capsys, "check", CORPUS / "simulation_before.qs", CORPUS / "simulation_after.qs")
    assert code == 0 and "Equivalent" in out


def test_check_self(capsys):
    code, _, _ = run(capsys, "check", CORPUS / "teleport.qs", CORPUS / "teleport.qs")
    assert code == 0


def test_check_extra_x(capsys, work):
    mutated = work / "mutated.qs"
    text = source("simulation_after.qs").replace("let measurements", "X(qubits[0]);\n        let measurements", 1)
    assert text != source("simulation_after.qs")
    mutated.write_text(text)
    code, out, _ = run(capsys, "check", CORPUS / "simulation_before.qs", mutated)
    assert code == 3 and "Iteration 1" in out
    code, out, _ = run(capsys, "check", "--json", CORPUS / "simulation_before.qs", mutated)
    assert json.loads(out)["verdict"] == "Inequivalent"


def test_check_inconclusive(capsys):
    code, _, _ = run(capsys, "check", "--max-qubits", "1", CORPUS / "ghz3.qs", CORPUS / "ghz3.qs")
    assert code == 5


def test_check_limits_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("QRT_LIMITS", json.dumps({"maxQubits": 1}))
    code, _, _ = run(capsys, "check", CORPUS / "ghz3.qs", CORPUS / "ghz3.qs")
    assert code == 5


def test_check_parse_error(capsys, work):
    bad = work / "bad.qs"
    bad.write_text("namespace {")
    code, out, err = run(capsys, "check", bad, CORPUS / "ghz3.qs")
    assert code == 4 and out == "" and "error[E_" in err


# ----------------------------------------------------------------------- pdg


def test_pdg_text(capsys):
    code, out, _ = run(capsys, "pdg", CORPUS / "simulation_before.qs", "MyNamespace.PerformQuantumSimulation")
    assert code == 0
    # the loop header fans out to every statement of its body
    fan = [ln for ln in out.splitlines() if ln.startswith("e 1 ") and ln.endswith("ControlDep")]
    assert len(fan) == 7
    assert sum(ln.startswith("n") for ln in out.splitlines()) == 9


def test_pdg_dot(capsys):
    code, out, _ = run(capsys, "pdg", "--format", "dot", CORPUS / "simulation_before.qs", "MyNamespace.Main")
    assert code == 0
    bare = re.sub(r'"(?:[^"\\]|\\.)*"', '""', out)
    assert out.startswith("digraph") and bare.count("{") == bare.count("}") == 1


def test_pdg_empty_body(capsys, work):
    f = work / "empty.qs"
    f.write_text("namespace E { operation Main() : Unit { } }")
    code, out, _ = run(capsys, "pdg", "--json", f, "E.Main")
    data = json.loads(out)
    assert code == 0 and len(data["nodes"]) == 1 and data["edges"] == []


def test_pdg_unknown_callable(capsys):
    code, out, err = run(capsys, "pdg", CORPUS / "hello_world.qs", "MyNamespace.Nope")
    assert code == 4 and out == ""


# ----------------------------------------------------------------------- fmt


def test_fmt_check_canonical(capsys, work):
    f = work / "simulation_after.qs"
    f.write_text(print_program(load("simulation_after.qs")))
    assert run(capsys, "fmt", "--check", f)[0] == 0


def test_fmt_check_reindented(capsys, work):
    f = work / "hello_world.qs"
    f.write_text("\n".join(ln.strip() for ln in source("hello_world.qs").splitlines()))
    code, _, err = run(capsys, "fmt", "--check", f)
    assert code == 1 and "not in canonical form" in err
    code, out, _ = run(capsys, "fmt", f)
    assert ast_equal(parse(out), load("hello_world.qs"))
    assert run(capsys, "fmt", "--write", f)[0] == 0
    assert f.read_text() == out
    assert run(capsys, "fmt", "--check", f)[0] == 0


def test_fmt_idempotent(capsys, work):
    for p in sorted(work.glob("*.qs")):
        _, once, _ = run(capsys, "fmt", p)
        p.write_text(once)
        _, twice, _ = run(capsys, "fmt", p)
        assert once == twice


def test_fmt_parse_error(capsys, work):
    bad = work / "bad.qs"
    bad.write_bytes(b"\xff\xfe")
    code, _, err = run(capsys, "fmt", bad)
    assert code == 4 and "UTF-8" in err


# ------------------------------------------------------------ entry point


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "qrt.cli", "list", "--json"], capture_output=True, text=True)
    assert out.returncode == 0 and len(json.loads(out.stdout)) == 19


def test_stdout_is_only_the_artifact():
    out = subprocess.run([sys.executable, "-m", "qrt.cli", "apply", "-r", "rename", "-t",
                          "MyNamespace.HelloWorld.result", "-a", "new_name=x1", str(CORPUS / "hello_world.qs")],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.startswith("--- a/hello_world.qs")
    assert "renamed" in out.stderr
