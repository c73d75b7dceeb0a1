"""Exhaustive enumeration of candidate refactoring requests for a program.

Candidates are syntactic: each is a plausible request, and many are expected
to fail their preconditions. Used to drive behaviour-preservation testing.
"""

from __future__ import annotations

from itertools import combinations

from ..analysis.index import format_path, iter_statements
from ..analysis.symbols import SymbolTable, analyze
from ..analysis.unused import entry_points, find_unused
from ..syntax import ast as A
from .base import literal_value
from .engine import CATALOG, RefactoringRequest
from .gaterules import SUBSTITUTION_RULES
from .unify import literal_positions

MAX_LITERAL_INDEX = 4


def symbol_locator(table: SymbolTable, sym) -> str:
    if sym.kind == "callable":
        return sym.qualified
    same = [s for s in table.locals_of(sym.owner) if s.name == sym.name]
    if len(same) == 1:
        return sym.qualified
    return f"{sym.qualified}#{same.index(sym) + 1}"


def _blocks(c: A.Callable) -> list[list]:
    groups: dict[int, list] = {id(c.body): []}
    order = [id(c.body)]
    for ref in iter_statements(c.body):
        if id(ref.block) not in groups:
            groups[id(ref.block)] = []
            order.append(id(ref.block))
        groups[id(ref.block)].append(ref)
    return [groups[k] for k in order if groups[k]]


def _ranges(c: A.Callable, min_len: int = 1):
    for refs in _blocks(c):
        for i in range(len(refs)):
            for j in range(i + min_len - 1, len(refs)):
                lo, hi = refs[i].path, refs[j].path
                yield format_path(lo) if i == j else f"{format_path(lo)}..{format_path(hi)}"


def _split_block(c: A.Callable) -> list:
    stmts = list(c.body.stmts)
    if len(stmts) == 1 and len(A.child_blocks(stmts[0])) == 1:
        stmts = list(A.child_blocks(stmts[0])[0].stmts)
    return stmts


def _user_call_paths(c: A.Callable, table: SymbolTable):
    for ref in iter_statements(c.body):
        if any(isinstance(n, A.Call) and table.symbol_of(n) is not None
               for n in ref.stmt.walk() if not isinstance(n, A.Block)):
            yield ref


def enumerate_requests(program: A.Program, names=None) -> list[RefactoringRequest]:
    """Candidate requests for the given refactorings (default: the whole catalog)."""
    table, diags = analyze(program)
    if diags:
        return []
    program = table.program
    names = list(CATALOG) if names is None else list(names)
    entries = {f"{ns}.{n}" for ns, n in entry_points(program)}
    callables = [(ns, c, f"{ns.name}.{c.name}") for ns, c in program.callables()]
    out: list[RefactoringRequest] = []

    def add(name, target, **args):
        if name in names:
            out.append(RefactoringRequest(name, target, args))

    for sym in table.symbols:
        loc = symbol_locator(table, sym)
        add("rename", loc, new_name=f"{sym.name}Renamed")
        if sym.kind != "callable":
            for other in table.locals_of(sym.owner):
                if other.name != sym.name:
                    add("rename", loc, new_name=other.name)
                    break
    for sym in find_unused(program, table):
        add("remove-unused", symbol_locator(table, sym))

    for ns, c, q in callables:
        add("merge-gates", q)
        add("remove-code-duplication", q)
        add("inline", q)
        if q not in entries:
            add("change-signature", q, add="extra:Int=0")
            for p in c.params:
                add("change-signature", q, remove=p.name)
            if len(c.params) >= 2:
                add("change-signature", q, reorder=",".join(str(k) for k in reversed(range(len(c.params)))))
            add("extract-namespace", q, new_namespace=f"{ns.name}.Extracted")
            for k in range(min(len(literal_positions(c.body)), MAX_LITERAL_INDEX)):
                add("parameterize-operation", q, index=k)
        stmts = _split_block(c)
        for k in range(1, len(stmts)):
            add("split-operation", q,
                partition=f"0..{k - 1}:{c.name}Head,{k}..{len(stmts) - 1}:{c.name}Tail")
        for rng in _ranges(c):
            add("extract-operation", f"{q}:{rng}")
            add("extract-function", f"{q}:{rng}")
            if ".." in rng:
                add("consolidate-measurements", f"{q}:{rng}")
                add("roll-loop", f"{q}:{rng}")
                add("merge-gates", f"{q}:{rng}")
        for ref in _user_call_paths(c, table):
            add("inline", f"{q}:{format_path(ref.path)}")
            add("specialize-operation", f"{q}:{format_path(ref.path)}")
        for refs in _blocks(c):
            for a, b in combinations(refs, 2):
                add("reorder-instructions", f"{q}:{format_path(a.path)}", other=format_path(b.path))
        for ref in iter_statements(c.body):
            p = f"{q}:{format_path(ref.path)}"
            for rule in SUBSTITUTION_RULES:
                add("replace-gate", p, rule=rule.name)
            s = ref.stmt
            if isinstance(s, A.For):
                add("unroll-loop", p)
            if isinstance(s, A.Using) and s.size is not None:
                n = literal_value(s.size)
                if n is not None and n[0] == "Int" and n[1] >= 2:
                    add("order-qubits", p, permutation=",".join(str(k) for k in reversed(range(n[1]))))
                    add("order-qubits", p, permutation=",".join(str((k + 1) % n[1]) for k in range(n[1])))

    by_kind: dict = {}
    for ns, c, q in callables:
        by_kind.setdefault((ns.name, c.is_operation), []).append(q)
    for group in by_kind.values():
        for a, b in combinations(group, 2):
            add("merge-operations", f"{a},{b}")
            add("parameterize-operation", f"{a},{b}")
    return out
