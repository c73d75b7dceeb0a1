from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrt.analysis import (
    analyze, build_pdg, check_quantum_safety, find_duplicates, find_unused, index_statements,
)
from qrt.syntax import parse, print_program

from conftest import corpus_files, load


def table_of(src):
    table, diags = analyze(parse(src))
    assert not diags, diags
    return table


def diag_codes(src) -> list[str]:
    table, diags = analyze(parse(src))
    if diags:
        return [d.code for d in diags]
    return [d.code for d in check_quantum_safety(table.program, table)]


def op(body: str, params: str = "q : Qubit", kind: str = "operation", ret: str = "Unit") -> str:
    return f"namespace N {{ {kind} F({params}) : {ret} {{ {body} }} }}"


def pdg_of(src, name="N.F"):
    table = table_of(src)
    return build_pdg(table.lookup(name).decl, table)


def edges(pdg, kind):
    return {(e.src, e.dst) for e in pdg.edges if e.kind == kind}


# ------------------------------------------------------------- resolution


def test_simulation_parameter_binding(sim_before):
    table, diags = analyze(sim_before)
    assert not diags
    sym = table.lookup("MyNamespace.PerformQuantumSimulation.qubits")
    assert sym.kind == "parameter"
    assert table.use_count(sym) >= 4


@pytest.mark.parametrize("body,code", [
    ("X(r);", "E_UNRESOLVED"),
    ("CNOT(q);", "E_ARITY"),
    ("let x = 1 + true;", "E_TYPE"),
])
def test_resolution_errors(body, code):
    assert code in diag_codes(op(body))


def test_qubit_escape_is_rejected():
    src = op("mutable keep = 0; using (a = Qubit()) { H(a); } X(a);", params="")
    assert diag_codes(src)[0] in ("E_UNRESOLVED", "E_QUBIT_ESCAPE")


@pytest.mark.parametrize("src,code", [
    (op("using (r = Qubit[1]) { CNOT(q, q); }"), "E_DUPLICATE_QUBIT"),
    (op("Controlled X(qs[0..1], qs[1]);", params="qs : Qubit[]"), "E_OVERLAP_CONTROL"),
    (op("H(q); return 1;", kind="function", ret="Int"), "E_QUANTUM_IN_FUNCTION"),
])
def test_quantum_safety(src, code):
    assert code in diag_codes(src)


def test_corpus_is_clean():
    for path in corpus_files():
        assert diag_codes(path.read_text()) == [], path.name


# ------------------------------------------------------------------- PDG


def test_pdg_single_qubit_order():
    pdg = pdg_of(op("H(q); X(q);"))
    assert edges(pdg, "QubitOrder") == {(1, 2)}
    assert edges(pdg, "DataDep") == set()


def test_pdg_measure_then_message():
    pdg = pdg_of(op('let r = M(q); Message($"{r}");'))
    assert (1, 2) in edges(pdg, "DataDep")
    assert edges(pdg, "QubitOrder") == set()


def test_pdg_simulation_loop(sim_before):
    table, _ = analyze(sim_before)
    pdg = build_pdg(table.lookup("MyNamespace.PerformQuantumSimulation").decl, table)
    assert len(pdg.nodes) == 1 + 1 + 7
    assert {(1, k) for k in range(2, 9)} <= edges(pdg, "ControlDep")
    assert {(6, 7), (7, 8)} <= edges(pdg, "DataDep")


def test_pdg_text_and_dot_formats():
    pdg = pdg_of(op("H(q); X(q);"))
    text = pdg.to_text().splitlines()
    assert text[1] == 'n1 "H(q);"'
    assert "e 1 2 QubitOrder" in text
    dot = pdg.to_dot()
    assert dot.count("{") == dot.count("}") and dot.startswith("digraph")


def test_pdg_empty_body():
    pdg = pdg_of(op(""))
    assert len(pdg.nodes) == 1 and pdg.edges == []


def test_qubit_order_is_acyclic_and_forward():
    for path in corpus_files():
        table, _ = analyze(load(path.name))
        for _, c in table.program.callables():
            pdg = build_pdg(c, table)
            assert all(e.src < e.dst for e in pdg.edges if e.kind == "QubitOrder")


# brute-force dependences for straight-line code over mutable integers
_VARS = ["a", "b", "c"]


@st.composite
def straight_line(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    stmts = []
    for _ in range(n):
        target = draw(st.sampled_from(_VARS))
        reads = draw(st.lists(st.sampled_from(_VARS), max_size=2))
        stmts.append((target, reads))
    return stmts


@settings(max_examples=150, deadline=None)
@given(straight_line())
def test_data_dependences_match_brute_force(stmts):
    decls = "mutable a = 0; mutable b = 0; mutable c = 0;"
    body = " ".join(f"set {t} = {' + '.join(r) if r else '1'};" for t, r in stmts)
    pdg = pdg_of(op(decls + " " + body, params=""))
    # statement k of the program: 0..2 declarations, 3.. the sets
    writes = {0: {"a"}, 1: {"b"}, 2: {"c"}}
    reads: dict[int, set] = {0: set(), 1: set(), 2: set()}
    for k, (t, r) in enumerate(stmts, start=3):
        writes[k], reads[k] = {t}, set(r)
    expected = set()
    total = len(writes)
    for j in range(total):
        for v in reads[j]:
            last = max(i for i in range(j) if v in writes[i])
            expected.add((last + 1, j + 1))
        for i in range(j):
            if reads[i] & writes[j] or writes[i] & writes[j]:
                expected.add((i + 1, j + 1))
    assert edges(pdg, "DataDep") == expected


# ------------------------------------------------------------------ index


def test_index_hello(hello):
    index = index_statements(hello)
    entry = index["MyNamespace", "HelloWorld", (1,)]
    assert entry.stmt.__class__.__name__ == "Using"
    inner = index["MyNamespace", "HelloWorld", (1, 0)]
    assert inner.stmt.expr.callee == "H"


def test_index_empty_body():
    assert index_statements(parse(op(""))).paths("N", "F") == []


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_index_stable_under_round_trip(path):
    p = load(path.name)
    assert index_statements(p).path_set() == index_statements(parse(print_program(p))).path_set()


# ----------------------------------------------------------------- unused


def test_find_unused_variable():
    table = table_of(op('let x = 1; let y = 2; Message($"{y}");', params=""))
    assert [s.name for s in find_unused(table.program, table)] == ["x"]


def test_find_unused_hello(hello):
    table, _ = analyze(hello)
    assert find_unused(table.program, table) == []


def test_find_unused_callable_but_not_main():
    src = "namespace N { operation Main() : Unit { } operation Lonely() : Unit { } }"
    table = table_of(src)
    assert [s.qualified for s in find_unused(table.program, table)] == ["N.Lonely"]


# ------------------------------------------------------------- duplicates


def _dups(body, min_len=2):
    table = table_of(op(body))
    return find_duplicates(table.lookup("N.F").decl, table, min_len)


def test_exact_clone_pair():
    assert _dups('H(q); X(q); Message("-"); H(q); X(q);') == [((0,), (3,), 2)]


def test_no_repetition():
    assert _dups("H(q); X(q); Z(q);") == []


def test_rename_consistent_clone():
    body = 'let a = M(q); Message($"{a}"); Reset(q); let b = M(q); Message($"{b}"); Reset(q);'
    assert _dups(body, 3) == [((0,), (3,), 3)]


def test_inconsistent_renaming_is_not_a_clone():
    body = 'let a = 1; let b = 2; Message($"{a}"); let c = 1; let d = 2; Message($"{d}");'
    assert _dups(body, 3) == []


def test_duplicates_match_brute_force():
    """Every reported pair is a maximal clone; every maximal clone is reported."""
    from qrt.analysis.duplicates import canonical

    body = "H(q); X(q); Z(q); H(q); X(q); Y(q); H(q); X(q); Z(q);"
    table = table_of(op(body))
    c = table.lookup("N.F").decl
    stmts = list(c.body.stmts)
    brute = set()
    for i, j in itertools.combinations(range(len(stmts)), 2):
        n = 0
        while j + n < len(stmts) and i + n < j and canonical(stmts[i:i + n + 1], table) == canonical(stmts[j:j + n + 1], table):
            n += 1
        if n >= 2 and not (i > 0 and canonical(stmts[i - 1:i + n], table) == canonical(stmts[j - 1:j + n], table)):
            brute.add(((i,), (j,), n))
    assert set(find_duplicates(c, table, 2)) == brute
