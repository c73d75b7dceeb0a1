from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrt.syntax import ParseError, ast as A, ast_equal, parse, parse_expr, print_program
from qrt.syntax.printer import expr_to_str

from conftest import corpus_files, load, source


def codes(src) -> list[str]:
    with pytest.raises(ParseError) as info:
        parse(src)
    return [d.code for d in info.value.diagnostics]


def test_hello_shape(hello):
    assert len(hello.namespaces) == 1
    ns = hello.namespaces[0]
    assert ns.opens == ("Microsoft.Quantum.Intrinsic",)
    assert [(c.kind, c.name) for c in ns.callables] == [("operation", "HelloWorld"), ("function", "MultiplyByTwo")]


def test_empty_namespace():
    p = parse("namespace N {}")
    assert len(p.namespaces) == 1 and p.namespaces[0].callables == ()


def test_missing_expression_reports_semicolon():
    src = "namespace N { operation F() : Unit { let x = ; } }"
    with pytest.raises(ParseError) as info:
        parse(src)
    d = info.value.diagnostics[0]
    assert d.code == "E_SYNTAX"
    assert src[d.span.start:d.span.end] == ";"


@pytest.mark.parametrize("src,code", [
    ("namespace N { operation F(x : Foo) : Unit { } }", "E_UNKNOWN_TYPE"),
    ("namespace N { operation F() : Unit { ", "E_UNBALANCED"),
    ("namespace N { operation F() : Unit { use q = Qubit(); } }", "E_UNSUPPORTED"),
    ("namespace N { operation F() : Unit { while (true) { } } }", "E_UNSUPPORTED"),
    (b"\xff\xfe", "E_SYNTAX"),
])
def test_error_codes(src, code):
    assert codes(src)[0] == code


def test_diagnostic_formats():
    with pytest.raises(ParseError) as info:
        parse("namespace N { operation F() : Unit { let x = ; } }", file="f.qs")
    d = info.value.diagnostics[0]
    assert d.format().startswith("f.qs:1:")
    assert "error[E_SYNTAX]" in d.format()
    data = json.loads(d.to_json())
    assert set(data) == {"code", "severity", "span", "message"}
    assert set(data["span"]) >= {"file", "line", "col", "endLine", "endCol"}


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_round_trip(path):
    p = load(path.name)
    text = print_program(p)
    again = parse(text)
    assert ast_equal(p, again)
    assert print_program(again) == text


def test_print_contract():
    p = parse("namespace N { operation F(q : Qubit) : Unit { H(q); X(q); Z(q); } function G() : Int { return 1; } }")
    lines = print_program(p).splitlines()
    header = next(i for i, l in enumerate(lines) if "operation F" in l)
    assert lines[header + 1:header + 4] == ["        H(q);", "        X(q);", "        Z(q);"]
    # one blank line between callables
    close = header + 4
    assert lines[close] == "    }" and lines[close + 1] == "" and "function G" in lines[close + 2]


def test_ast_equal_ignores_spans_and_files(sim_before, sim_after):
    text = source("simulation_before.qs")
    assert ast_equal(parse(text, file="a.qs"), parse(text, file="b.qs"))
    assert ast_equal(sim_before, sim_before)
    assert not ast_equal(sim_before, sim_after)


def test_identifier_spans_are_faithful():
    text = source("hello_world.qs")
    p = parse(text)
    idents = [n for n in p.walk() if isinstance(n, A.Ident)]
    assert idents
    for n in idents:
        assert text[n.span.start:n.span.end] == n.name


def test_comments_survive_printing(hello):
    text = print_program(hello)
    assert "// Apply Hadamard gate to create a superposition" in text
    assert text.index("// Apply Hadamard") < text.index("H(qubit);")


def test_crlf_input_gives_lf_output():
    text = source("hello_world.qs").replace("\n", "\r\n")
    out = print_program(parse(text))
    assert "\r" not in out
    assert ast_equal(parse(text), load("hello_world.qs"))


def test_interpolation_parts_are_expressions(hello):
    interp = [n for n in hello.walk() if isinstance(n, A.InterpString)]
    names = {p.name for s in interp for p in s.parts if isinstance(p, A.Ident)}
    assert {"result", "entanglementResult", "multipliedResult"} <= names


def test_inclusive_range_and_slice_parse():
    e = parse_expr("qs[0..1]")
    assert isinstance(e, A.Slice) and isinstance(e.range, A.RangeExpr)


# --------------------------------------------------------- generated programs

_ints = st.integers(min_value=-50, max_value=50).map(lambda v: A.IntLit(v) if v >= 0 else A.Unary("-", A.IntLit(-v)))
_leaf = st.one_of(_ints, st.sampled_from([A.Ident("a"), A.Ident("b"), A.BoolLit(True)]))


def _binary(children):
    ops = st.sampled_from(["+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "and", "or"])
    return st.one_of(
        st.builds(A.Binary, ops, children, children),
        st.builds(lambda x: A.Unary("not", x), children),
        st.builds(lambda x: A.Unary("-", x), children),
    )


_exprs = st.recursive(_leaf, _binary, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(_exprs)
def test_expression_printing_round_trips(e):
    # printed precedence must reproduce the same tree
    assert parse_expr(expr_to_str(e)) == e
