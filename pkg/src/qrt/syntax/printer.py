"""Canonical pretty-printer: 4-space indent, one statement per line."""

from __future__ import annotations

from . import ast as A

INDENT = "    "

_BIN_PREC = {
    "or": 2, "and": 3,
    "==": 4, "!=": 4,
    "<": 5, "<=": 5, ">": 5, ">=": 5,
    "+": 6, "-": 6,
    "*": 7, "/": 7, "%": 7,
}
_RANGE_PREC = 1
_UNARY_PREC = 8
_ATOM_PREC = 9

_STR_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}
_INTERP_ESCAPES = {**_STR_ESCAPES, "{": "\\{", "}": "\\}"}


def _escape(text: str, table: dict) -> str:
    return "".join(table.get(ch, ch) for ch in text)


def _prec(e) -> int:
    if isinstance(e, A.RangeExpr):
        return _RANGE_PREC
    if isinstance(e, A.Binary):
        return _BIN_PREC[e.op]
    if isinstance(e, A.Unary):
        return _UNARY_PREC
    return _ATOM_PREC


def expr_to_str(e, min_prec: int = 0) -> str:
    text = _expr(e)
    return f"({text})" if _prec(e) < min_prec else text


def _expr(e) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.DoubleLit):
        return repr(float(e.value))
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.StringLit):
        return f'"{_escape(e.value, _STR_ESCAPES)}"'
    if isinstance(e, A.ResultLit):
        return e.value
    if isinstance(e, A.InterpString):
        out = []
        for part in e.parts:
            if isinstance(part, str):
                out.append(_escape(part, _INTERP_ESCAPES))
            else:
                out.append("{" + expr_to_str(part) + "}")
        return '$"' + "".join(out) + '"'
    if isinstance(e, A.Ident):
        return e.name
    if isinstance(e, A.ArrayLit):
        return "[" + ", ".join(expr_to_str(i) for i in e.items) + "]"
    if isinstance(e, A.RangeExpr):
        return f"{expr_to_str(e.lo, _RANGE_PREC + 1)}..{expr_to_str(e.hi, _RANGE_PREC + 1)}"
    if isinstance(e, A.Index):
        return f"{expr_to_str(e.base, _ATOM_PREC)}[{expr_to_str(e.index)}]"
    if isinstance(e, A.Slice):
        return f"{expr_to_str(e.base, _ATOM_PREC)}[{expr_to_str(e.range)}]"
    if isinstance(e, A.Binary):
        p = _BIN_PREC[e.op]
        return f"{expr_to_str(e.lhs, p)} {e.op} {expr_to_str(e.rhs, p + 1)}"
    if isinstance(e, A.Unary):
        sep = " " if e.op == "not" else ""
        return f"{e.op}{sep}{expr_to_str(e.operand, _UNARY_PREC)}"
    if isinstance(e, A.Call):
        return f"{e.callee}({', '.join(expr_to_str(a) for a in e.args)})"
    if isinstance(e, A.ControlledApply):
        args = ", ".join(expr_to_str(a) for a in (e.controls, *e.args))
        return f"Controlled {e.gate}({args})"
    raise TypeError(f"not an expression: {e!r}")


def _comment_lines(comments, depth: int) -> list[str]:
    return [f"{INDENT * depth}//{c}" for c in comments]


def stmt_header(s) -> str:
    """One-line rendering of a statement; compound statements end at '{'."""
    if isinstance(s, A.Let):
        return f"let {s.name} = {expr_to_str(s.value)};"
    if isinstance(s, A.Mutable):
        return f"mutable {s.name} = {expr_to_str(s.value)};"
    if isinstance(s, A.Set):
        return f"set {s.name} = {expr_to_str(s.value)};"
    if isinstance(s, A.Return):
        return f"return {expr_to_str(s.value)};"
    if isinstance(s, A.CallStmt):
        return f"{expr_to_str(s.expr)};"
    if isinstance(s, A.Using):
        alloc = "Qubit()" if s.size is None else f"Qubit[{expr_to_str(s.size)}]"
        return f"using ({s.name} = {alloc}) {{"
    if isinstance(s, A.For):
        return f"for ({s.var} in {expr_to_str(s.range)}) {{"
    if isinstance(s, A.If):
        return f"if ({expr_to_str(s.cond)}) {{"
    raise TypeError(f"not a statement: {s!r}")


def _block_lines(block: A.Block, depth: int) -> list[str]:
    lines: list[str] = []
    for s in block.stmts:
        lines.extend(stmt_lines(s, depth))
    lines.extend(_comment_lines(block.trailing, depth))
    return lines


def stmt_lines(s, depth: int = 0) -> list[str]:
    pad = INDENT * depth
    lines = _comment_lines(getattr(s, "comments", ()), depth)
    lines.append(pad + stmt_header(s))
    if isinstance(s, (A.Using, A.For)):
        lines.extend(_block_lines(s.body, depth + 1))
        lines.append(pad + "}")
    elif isinstance(s, A.If):
        lines.extend(_block_lines(s.then, depth + 1))
        for e in s.elifs:
            lines.append(f"{pad}}} elif ({expr_to_str(e.cond)}) {{")
            lines.extend(_block_lines(e.body, depth + 1))
        if s.else_ is not None:
            lines.append(pad + "} else {")
            lines.extend(_block_lines(s.else_, depth + 1))
        lines.append(pad + "}")
    return lines


def callable_lines(c: A.Callable, depth: int = 0) -> list[str]:
    pad = INDENT * depth
    params = ", ".join(f"{p.name} : {p.type}" for p in c.params)
    lines = _comment_lines(c.comments, depth)
    lines.append(f"{pad}{c.kind} {c.name}({params}) : {c.return_type} {{")
    lines.extend(_block_lines(c.body, depth + 1))
    lines.append(pad + "}")
    return lines


def namespace_lines(ns: A.Namespace) -> list[str]:
    lines = _comment_lines(ns.comments, 0)
    lines.append(f"namespace {ns.name} {{")
    lines.extend(f"{INDENT}open {o};" for o in ns.opens)
    for i, c in enumerate(ns.callables):
        if i > 0 or ns.opens:
            lines.append("")
        lines.extend(callable_lines(c, 1))
    lines.extend(_comment_lines(ns.trailing, 1))
    lines.append("}")
    return lines


def print_program(program: A.Program) -> str:
    lines: list[str] = []
    for i, ns in enumerate(program.namespaces):
        if i:
            lines.append("")
        lines.extend(namespace_lines(ns))
    lines.extend(_comment_lines(program.trailing, 0))
    return "\n".join(lines) + "\n" if lines else ""


def to_source(node) -> str:
    """Render any node: program, callable, statement, block or expression."""
    if isinstance(node, A.Program):
        return print_program(node)
    if isinstance(node, A.Namespace):
        return "\n".join(namespace_lines(node)) + "\n"
    if isinstance(node, A.Callable):
        return "\n".join(callable_lines(node)) + "\n"
    if isinstance(node, A.STATEMENTS):
        return "\n".join(stmt_lines(node)) + "\n"
    if isinstance(node, A.Block):
        return "\n".join(_block_lines(node, 0)) + "\n"
    if isinstance(node, A.Type):
        return str(node)
    return expr_to_str(node)
