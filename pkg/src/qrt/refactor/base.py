"""Shared plumbing for refactorings: targets, tree edits, names, results."""

from __future__ import annotations

import dataclasses
import difflib
import re
from dataclasses import dataclass, field

from ..analysis.index import Path, StatementRef, format_path, iter_statements, parse_path, parse_range
from ..analysis.safety import check_quantum_safety
from ..analysis.symbols import Symbol, SymbolTable, analyze
from ..analysis.unused import entry_points
from ..syntax import ast as A
from ..syntax.builtins import BUILTINS
from ..syntax.diagnostics import Diagnostic
from ..syntax.lexer import KEYWORDS, UNSUPPORTED_KEYWORDS
from ..syntax.printer import print_program

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class Precondition(Exception):
    """A refactoring precondition does not hold; the input is returned unchanged."""


@dataclass
class EditResult:
    program: A.Program
    changes: list[str] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    # qualified callable names that moved, old -> new (used to pair entry points)
    renamed: dict[str, str] = field(default_factory=dict)
    original: A.Program | None = None
    verdict: object | None = None  # sim Verdict when verification ran

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    @property
    def source(self) -> str:
        return print_program(self.program)

    def diff(self, before: str | None = None, name: str = "input.qs") -> str:
        old = before if before is not None else print_program(self.original or self.program)
        lines = difflib.unified_diff(old.splitlines(keepends=True), self.source.splitlines(keepends=True),
                                     f"a/{name}", f"b/{name}", n=3)
        return "".join(lines)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "changes": list(self.changes),
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "renamed": dict(self.renamed),
            "source": self.source if self.ok else None,
            "diff": self.diff() if self.ok else "",
            "verdict": self.verdict.to_dict() if self.verdict is not None else None,
        }


# ------------------------------------------------------------------- names


def check_identifier(name: str, what: str = "name") -> None:
    if not isinstance(name, str) or not _IDENT.match(name):
        raise Precondition(f"{what} {name!r} is not a valid identifier")
    if name in KEYWORDS or name in UNSUPPORTED_KEYWORDS:
        raise Precondition(f"{what} {name!r} is a reserved word")
    if name in BUILTINS:
        raise Precondition(f"{what} {name!r} is a builtin name")


def check_namespace_name(name: str) -> None:
    parts = name.split(".") if isinstance(name, str) else [""]
    for p in parts:
        if not _IDENT.match(p) or p in KEYWORDS:
            raise Precondition(f"{name!r} is not a valid namespace name")


def all_names(node: A.Node) -> set[str]:
    out: set[str] = set()
    for n in node.walk():
        for attr in ("name", "callee", "var"):
            v = getattr(n, attr, None)
            if isinstance(v, str):
                out.add(v)
    return out


def fresh_name(base: str, taken: set[str]) -> str:
    """``base`` itself is never returned; the smallest ``base_k`` not taken is."""
    k = 1
    while f"{base}_{k}" in taken or f"{base}_{k}" in BUILTINS:
        k += 1
    return f"{base}_{k}"


def pick_name(requested: str | None, base: str, taken: set[str]) -> str:
    if requested:
        check_identifier(requested)
        return requested
    if base not in taken and base not in BUILTINS and base not in KEYWORDS:
        return base
    return fresh_name(base, taken)


# ------------------------------------------------------------ tree editing


def rebuild(node: A.Node, mapping: dict[int, object]) -> A.Node:
    """Copy ``node`` replacing subtrees whose ``id`` is in ``mapping``."""
    new = mapping.get(id(node))
    if new is not None:
        return new
    return node.map_children(lambda c: rebuild(c, mapping))


def rewrite(node: A.Node, fn) -> A.Node:
    """Bottom-up copy; ``fn(original, rebuilt)`` may return a replacement.

    ``original`` keeps its identity, so symbol-table lookups still work.
    """
    rebuilt = node.map_children(lambda c: rewrite(c, fn))
    out = fn(node, rebuilt)
    return rebuilt if out is None else out


def replace_stmts(program: A.Program, block: A.Block, start: int, stop: int, new_stmts) -> A.Program:
    stmts = list(block.stmts)
    stmts[start:stop] = list(new_stmts)
    return rebuild(program, {id(block): dataclasses.replace(block, stmts=tuple(stmts))})


def int_expr(v: int) -> A.Node:
    return A.IntLit(v) if v >= 0 else A.Unary("-", A.IntLit(-v))


def literal_value(e) -> tuple[str, object] | None:
    """(type name, value) of a literal, including negated numeric literals."""
    if isinstance(e, A.IntLit):
        return ("Int", e.value)
    if isinstance(e, A.DoubleLit):
        return ("Double", e.value)
    if isinstance(e, A.BoolLit):
        return ("Bool", e.value)
    if isinstance(e, A.StringLit):
        return ("String", e.value)
    if isinstance(e, A.ResultLit):
        return ("Result", e.value)
    if isinstance(e, A.Unary) and e.op == "-" and isinstance(e.operand, (A.IntLit, A.DoubleLit)):
        t, v = literal_value(e.operand)
        return (t, -v)
    return None


def literal_node(type_name: str, value) -> A.Node:
    if type_name == "Int":
        return int_expr(value)
    if type_name == "Double":
        return A.DoubleLit(value) if value >= 0 else A.Unary("-", A.DoubleLit(-value))
    if type_name == "Bool":
        return A.BoolLit(value)
    if type_name == "String":
        return A.StringLit(value)
    if type_name == "Result":
        return A.ResultLit(value)
    raise ValueError(type_name)


# ----------------------------------------------------------------- context


@dataclass
class StmtRange:
    callable: A.Callable
    namespace: str
    block: A.Block
    start: int
    stop: int  # exclusive
    refs: list[StatementRef]

    @property
    def stmts(self) -> list:
        return list(self.block.stmts[self.start:self.stop])

    @property
    def after(self) -> list:
        return list(self.block.stmts[self.stop:])

    @property
    def paths(self) -> list[Path]:
        return [r.path for r in self.refs]

    def label(self) -> str:
        lo, hi = self.refs[0].path, self.refs[-1].path
        text = format_path(lo) if lo == hi else f"{format_path(lo)}..{format_path(hi)}"
        return f"{self.namespace}.{self.callable.name}:{text}"


class Context:
    """A resolved, quantum-safe program plus lookups shared by the refactorings."""

    def __init__(self, program: A.Program) -> None:
        table, diags = analyze(program)
        if diags:
            raise Precondition("input does not resolve: " + diags[0].format())
        safety = check_quantum_safety(table.program, table)
        if safety:
            raise Precondition("input is not quantum-safe: " + safety[0].format())
        self.table: SymbolTable = table
        self.program: A.Program = table.program

    # -------------------------------------------------------- callables

    def callable(self, locator: str) -> tuple[str, A.Callable]:
        try:
            sym = self.table.lookup(locator)
        except KeyError as e:
            raise Precondition(str(e.args[0] if e.args else e)) from None
        if sym.kind != "callable":
            raise Precondition(f"{locator!r} is not a callable")
        return sym.namespace, sym.decl

    def callable_sym(self, c: A.Callable) -> Symbol:
        return self.table.symbols[self.table.refs[id(c)]]

    def qualified(self, c: A.Callable) -> str:
        return self.callable_sym(c).qualified

    def namespace(self, name: str) -> A.Namespace:
        ns = self.program.namespace(name)
        if ns is None:
            raise Precondition(f"no namespace {name!r}")
        return ns

    def entry_names(self) -> set[str]:
        return {f"{ns}.{n}" for ns, n in entry_points(self.program)}

    def symbol(self, locator: str) -> Symbol:
        try:
            return self.table.lookup(locator)
        except KeyError as e:
            raise Precondition(str(e.args[0] if e.args else e)) from None

    def call_sites(self, sym: Symbol) -> list[A.Call]:
        return [n for n in self.table.uses.get(sym.id, ()) if isinstance(n, A.Call)]

    def gate_refs(self, sym: Symbol) -> list[A.Ident]:
        return [n for n in self.table.uses.get(sym.id, ()) if isinstance(n, A.Ident)]

    def enclosing_callable(self, node: A.Node) -> A.Callable:
        for _, c in self.program.callables():
            for n in c.walk():
                if n is node:
                    return c
        raise KeyError("node not in program")

    # -------------------------------------------------------- statements

    def split_target(self, target: str) -> tuple[str, A.Callable, str | None]:
        head, sep, tail = target.partition(":")
        ns, c = self.callable(head.strip())
        return ns, c, (tail.strip() if sep else None)

    def statement(self, target: str) -> tuple[str, A.Callable, StatementRef]:
        ns, c, tail = self.split_target(target)
        if not tail:
            raise Precondition(f"target {target!r} needs a statement path")
        try:
            path = parse_path(tail)
        except ValueError as e:
            raise Precondition(str(e)) from None
        return ns, c, self.ref_at(c, path)

    def ref_at(self, c: A.Callable, path: Path) -> StatementRef:
        for ref in iter_statements(c.body):
            if ref.path == tuple(path):
                return ref
        raise Precondition(f"no statement at {format_path(path)} in {c.name}")

    def range(self, target: str) -> StmtRange:
        ns, c, tail = self.split_target(target)
        if not tail:
            raise Precondition(f"target {target!r} needs a statement range")
        return self.range_in(ns, c, tail)

    def range_in(self, ns: str, c: A.Callable, text: str) -> StmtRange:
        try:
            lo, hi = parse_range(text)
        except ValueError as e:
            raise Precondition(str(e)) from None
        return self.range_paths(ns, c, lo, hi)

    def range_paths(self, ns: str, c: A.Callable, lo: Path, hi: Path) -> StmtRange:
        a, b = self.ref_at(c, lo), self.ref_at(c, hi)
        if a.block is not b.block:
            raise Precondition("range endpoints are not in the same block")
        if b.position < a.position:
            raise Precondition("range is empty")
        refs = [r for r in iter_statements(c.body)
                if r.block is a.block and a.position <= r.position <= b.position]
        return StmtRange(c, ns, a.block, a.position, b.position + 1, refs)


# --------------------------------------------------------------- utilities


def callable_uses(node: A.Node, table: SymbolTable) -> set[int]:
    """Symbol ids of the user callables referenced in ``node``."""
    out = set()
    for n in node.walk():
        sym = table.symbol_of(n) if isinstance(n, (A.Call, A.Ident)) else None
        if sym is not None and sym.kind == "callable":
            out.add(sym.id)
    return out


def reaches(table: SymbolTable, start: A.Callable, goal_sid: int) -> bool:
    """True when ``start`` can (transitively) reference the callable ``goal_sid``."""
    seen: set[int] = set()
    stack = [start]
    while stack:
        c = stack.pop()
        for sid in callable_uses(c.body, table):
            if sid == goal_sid:
                return True
            if sid not in seen:
                seen.add(sid)
                stack.append(table.symbols[sid].decl)
    return False


def has_effects(node: A.Node, table: SymbolTable) -> bool:
    """Conservative: any call or controlled application may act on qubits or the trace."""
    return any(isinstance(n, (A.Call, A.ControlledApply)) for n in node.walk())


def replace_callable(program: A.Program, old: A.Callable, new_callables) -> A.Program:
    """Replace ``old`` in its namespace by the sequence ``new_callables``."""
    namespaces = []
    for ns in program.namespaces:
        if any(c is old for c in ns.callables):
            cs = []
            for c in ns.callables:
                cs.extend(new_callables if c is old else [c])
            ns = dataclasses.replace(ns, callables=tuple(cs))
        namespaces.append(ns)
    return dataclasses.replace(program, namespaces=tuple(namespaces))


def resolves_to(table: SymbolTable, ns_name: str, name: str) -> str | None:
    """Qualified callable a bare ``name`` denotes inside namespace ``ns_name``."""
    own = f"{ns_name}.{name}"
    if own in table.callables:
        return own
    ns = table.program.namespace(ns_name)
    hits = [f"{o}.{name}" for o in (ns.opens if ns else ()) if f"{o}.{name}" in table.callables]
    return hits[0] if len(hits) == 1 else None


_NAME_FIELDS = {
    A.Ident: "name", A.Call: "callee", A.Let: "name", A.Mutable: "name", A.Set: "name",
    A.For: "var", A.Using: "name", A.Param: "name", A.Callable: "name",
}


def remap(node: A.Node, table: SymbolTable, rename: dict[int, str] | None = None,
          subst: dict[int, A.Node] | None = None) -> A.Node:
    """Copy of ``node`` with symbols renamed and/or reads replaced by expressions."""
    rename = rename or {}
    subst = subst or {}

    def fn(orig, new):
        sid = table.refs.get(id(orig))
        if sid is None:
            return None
        if isinstance(orig, A.Ident) and sid in subst:
            return subst[sid]
        if sid in rename:
            f = _NAME_FIELDS.get(type(orig))
            if f is not None:
                return dataclasses.replace(new, **{f: rename[sid]})
        return None
    return rewrite(node, fn)


def splice_statements(node: A.Node, replacements: dict[int, list]) -> A.Node:
    """Replace statements (by id) with statement lists wherever they occur."""
    def fn(orig, new):
        if not isinstance(orig, A.Block) or not any(id(s) in replacements for s in orig.stmts):
            return None
        out = []
        for o, n in zip(orig.stmts, new.stmts):
            out.extend(replacements[id(o)] if id(o) in replacements else [n])
        return dataclasses.replace(new, stmts=tuple(out))
    return rewrite(node, fn)
