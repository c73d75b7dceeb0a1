"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line."""

from __future__ import annotations

import collections
import random
import time

import pytest

from qrt.analysis import analyze, build_pdg
from qrt.analysis.index import format_path, iter_statements
from qrt.refactor import CATALOG, CATALOG_ROWS, apply_refactoring, catalog
from qrt.refactor.gaterules import GATE_RULES, GateApp, GateRule
from qrt.refactor.targets import enumerate_requests
from qrt.sim import check_equivalence, matrix_rule_check, run_distribution
from qrt.syntax import DiagnosticError, ast_equal, parse, print_program

from conftest import CORPUS, EXPECTED_ROWS, corpus_files, load

SPLIT = "0..3:PerformQuantumOperations,4..6:MeasureAndDisplayResult"


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, detail
    return emit


def test_1_split_golden(report, sim_before, sim_after):
    start = time.perf_counter()
    result = apply_refactoring(sim_before, {"refactoring": "split-operation",
                                             "target": "MyNamespace.PerformQuantumSimulation",
                                             "args": {"partition": SPLIT}}, verify=True)
    elapsed = time.perf_counter() - start
    ok = (result.ok and ast_equal(result.program, sim_after)
          and result.verdict.kind == "Equivalent"
          and check_equivalence(result.program, sim_after).equivalent and elapsed < 1.0)
    report(1, "split_operation reproduces the hand-written after-code", ok, f"{elapsed:.3f}s")


def test_2_catalog_coverage(report):
    entries = catalog()
    covered = {row for e in entries for row in e.rows}
    ok = (len(EXPECTED_ROWS) == 25 and covered == EXPECTED_ROWS == CATALOG_ROWS
          and [e.name for e in entries] == sorted(CATALOG))
    report(2, "catalog covers all 25 catalog rows", ok, f"{len(covered)}/25 rows, {len(entries)} entries")


def test_3_master_preservation(report):
    start = time.perf_counter()
    outcome = collections.Counter()
    failures = []
    programs = 0
    for path in corpus_files():
        program = load(path.name)
        programs += 1
        for req in enumerate_requests(program):
            result = apply_refactoring(program, req, verify=True)
            if not result.ok:
                outcome["rejected"] += 1
                if not ast_equal(result.program, program):
                    failures.append((path.name, req, "rejection changed the program"))
                continue
            outcome["applied"] += 1
            outcome[req.refactoring] += 1
            if result.verdict is None or result.verdict.kind != "Equivalent":
                failures.append((path.name, req, result.verdict and result.verdict.describe()))
    elapsed = time.perf_counter() - start
    unexercised = sorted(set(CATALOG) - set(outcome))
    ok = programs >= 20 and not failures and not unexercised and elapsed < 300
    detail = (f"{programs} programs, {outcome['applied']} applied, {outcome['rejected']} rejected, "
              f"{len(failures)} not equivalent, {elapsed:.1f}s")
    if unexercised:
        detail += f", never applied: {unexercised}"
    if failures:
        detail += f", first: {failures[0]}"
    report(3, "every applicable refactoring preserves behaviour on the corpus", ok, detail)


def test_4_gate_rules(report):
    results = {r.name: matrix_rule_check(r) for r in GATE_RULES}
    corrupted = GateRule("HX->I", "merge", (GateApp("H", (0,)), GateApp("X", (0,))), ())
    ok = all(results.values()) and not matrix_rule_check(corrupted)
    report(4, "gate rules match their matrices; a corrupted rule is caught", ok,
           f"{sum(results.values())}/{len(results)} rules")


def _sibling_pairs(c):
    by_block = collections.defaultdict(list)
    for ref in iter_statements(c.body):
        by_block[id(ref.block)].append(ref)
    for refs in by_block.values():
        refs.sort(key=lambda r: r.position)
        for i in range(len(refs)):
            for j in range(i + 1, len(refs)):
                yield refs[i:j + 1]


def _connected(pdg, xs, ys) -> bool:
    return any(pdg.has_path(x, y) or pdg.has_path(y, x) for x in xs for y in ys)


def test_5_pdg_soundness(report):
    swapped = rejected = 0
    problems = []
    for path in corpus_files():
        program = load(path.name)
        table, _ = analyze(program)
        seen_dependent = False
        for ns, c in table.program.callables():
            statements = list(iter_statements(c.body))
            pdg = build_pdg(c, table)
            for run in _sibling_pairs(c):
                a, b = run[0], run[-1]
                sa = pdg.subtree(pdg.node_at(a.path).id)
                sb = pdg.subtree(pdg.node_at(b.path).id)
                middle = [pdg.subtree(pdg.node_at(m.path).id) for m in run[1:-1]]
                target = f"{ns.name}.{c.name}:{format_path(a.path)}"
                req = {"refactoring": "reorder-instructions", "target": target,
                       "args": {"other": format_path(b.path)}}
                direct = pdg.blocking_edge(a.path, b.path)
                if len(run) == 2 and direct is not None:
                    # a dependent adjacent pair must be refused, naming the edge kind
                    result = apply_refactoring(program, req)
                    if result.ok or direct.kind not in result.diagnostics[0].message:
                        problems.append((path.name, target, "dependent pair not refused"))
                    else:
                        rejected += 1
                        seen_dependent = True
                    continue
                if len(statements) > 8:
                    continue
                # independent: no dependence path between the two statements or anything they jump over
                if _connected(pdg, sa, sb) or any(_connected(pdg, sa | sb, m) for m in middle):
                    continue
                if any(type(r.stmt).__name__ == "Return" for r in run):
                    continue
                result = apply_refactoring(program, req, verify=True)
                if not result.ok or result.verdict.kind != "Equivalent":
                    problems.append((path.name, target, result.diagnostics or result.verdict))
                else:
                    swapped += 1
        if not seen_dependent:
            problems.append((path.name, None, "no dependent pair rejected"))
    ok = not problems and swapped > 0
    report(5, "independent statements swap safely; dependent ones are refused", ok,
           f"{swapped} swaps verified, {rejected} dependent pairs refused"
           + (f", first problem: {problems[0]}" if problems else ""))


def test_6_bell_correlation(report, hello):
    d = run_distribution(hello)
    items = d.items()
    ok = len(items) == 2 and all(abs(p - 0.5) <= 1e-9 for _, p in items)
    for trace, _ in items:
        qubit = [t for t in trace if t.startswith("Measured qubit:")]
        ancilla = [t for t in trace if t.startswith("Measured ancilla:")]
        ok = ok and len(qubit) == len(ancilla) == 1 and qubit[0].split(": ")[1] == ancilla[0].split(": ")[1]
    report(6, "the hello-world Bell pair gives two agreeing outcomes at probability 0.5", ok,
           ", ".join(f"{p:.12f}" for _, p in items))


_TOKENS = ["namespace", "operation", "function", "using", "let", "mutable", "set", "for", "in", "if", "else",
           "return", "Qubit", "Qubit[", "Int", "Result", "{", "}", "(", ")", "[", "]", ";", ",", ":", "..",
           "=", "==", "+", "-", "*", "/", "%", "H", "CNOT", "M", "Controlled", "X", "q", "qs", "$\"", "\"",
           "{x}", "0", "1", "2.5", "true", "One", "//", "\n", " ", "open", "Unit", "MultiM", "\\", "\r\n"]


def _fuzz_inputs(count: int, seed: int = 20261016):
    rng = random.Random(seed)
    corpus = [p.read_bytes() for p in corpus_files()]
    for k in range(count):
        mode = k % 4
        if mode == 0:
            data = rng.randbytes(rng.randint(0, 4096))
        elif mode == 1:
            data = "".join(rng.choice(_TOKENS) + rng.choice(["", " "]) for _ in range(rng.randint(0, 600))).encode()
        else:
            data = bytearray(rng.choice(corpus))
            for _ in range(rng.randint(1, 8)):
                i = rng.randrange(len(data) + 1)
                j = min(len(data), i + rng.randint(0, 40))
                op = rng.randrange(3)
                if op == 0:
                    del data[i:j]
                elif op == 1:
                    data[i:i] = rng.choice(_TOKENS).encode()
                else:
                    data[i:j] = rng.randbytes(j - i)
            data = bytes(data)
        yield data[:4096]


def test_7_round_trip_and_fuzz(report):
    round_trips = 0
    for path in corpus_files():
        first = load(path.name)
        second = parse(print_program(first))
        third = parse(print_program(second))
        round_trips += ast_equal(first, second) and ast_equal(second, third) \
            and print_program(second) == print_program(third)
    crashes, parsed = [], 0
    for data in _fuzz_inputs(10_000):
        try:
            program = parse(data)
        except DiagnosticError:
            continue
        except Exception as e:  # noqa: BLE001 - anything else is a parser crash
            crashes.append((data[:60], repr(e)))
            continue
        parsed += 1
        analyze(program)
    ok = round_trips == len(corpus_files()) and not crashes
    report(7, "corpus round-trips and the parser survives 10,000 fuzz inputs", ok,
           f"{round_trips} round-trips, {parsed} fuzz inputs parsed, {len(crashes)} crashes"
           + (f", first: {crashes[0]}" if crashes else ""))


def test_8_atomicity(report, tmp_path):
    import test_cli

    before = {p.name: p.read_bytes() for p in CORPUS.glob("*.qs")}
    passed = 0
    for name, args in test_cli.PRECONDITION_FAILURES:
        f = tmp_path / name
        f.write_bytes(before[name])
        code = test_cli.main([*("apply", *args), "--write", str(f)])
        passed += code == 2 and f.read_bytes() == before[name]
    untouched = all((CORPUS / n).read_bytes() == b for n, b in before.items())
    ok = passed == len(test_cli.PRECONDITION_FAILURES) and untouched
    report(8, "precondition failures leave input files byte-identical", ok,
           f"{passed}/{len(test_cli.PRECONDITION_FAILURES)} cases")
