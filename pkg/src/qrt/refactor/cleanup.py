"""Removing unused declarations and reordering independent statements."""

from __future__ import annotations

import dataclasses

from ..analysis.index import format_path, iter_statements, parse_path
from ..analysis.pdg import build_pdg
from ..syntax import ast as A
from .base import Context, Precondition, has_effects, rewrite, splice_statements
from .loops import _names_outside


def _demoted(value, table):
    """Statements that keep the effects of a discarded initializer."""
    if not has_effects(value, table):
        return []
    if isinstance(value, A.Call):
        return [A.CallStmt(value)]
    raise Precondition("the initializer has effects that cannot stand alone as a statement")


def remove_unused(ctx: Context, target: str):
    sym = ctx.symbol(target)
    table = ctx.table
    if table.use_count(sym):
        raise Precondition(f"symbol is used: {sym.qualified} has {table.use_count(sym)} use(s)")
    if sym.kind == "callable":
        if sym.qualified in ctx.entry_names():
            raise Precondition(f"target is {sym.name}: entry points cannot be removed")
        program = rewrite(ctx.program, lambda orig, new: dataclasses.replace(
            new, callables=tuple(c for o, c in zip(orig.callables, new.callables) if o is not sym.decl))
            if isinstance(orig, A.Namespace) and any(o is sym.decl for o in orig.callables) else None)
        return program, [f"removed callable {sym.qualified}"], {}
    if sym.kind == "parameter":
        from .naming import change_signature
        program, changes, renamed = change_signature(ctx, sym.owner, remove=sym.name)
        return program, changes, renamed
    if sym.kind == "loopVar":
        raise Precondition("a loop variable is required by its loop")
    if sym.kind == "qubitBinding":
        u = sym.decl
        if not isinstance(u, A.Using):
            raise Precondition("only qubits allocated by a using block can be removed")
        c = ctx.callable(sym.owner)[1]
        inner = {s.name for s in u.body.stmts if isinstance(s, (A.Let, A.Mutable))}
        clash = inner & _names_outside(c, u)
        if clash:
            raise Precondition(f"name collision: unwrapping would expose {sorted(clash)[0]!r}")
        program = splice_statements(ctx.program, {id(u): list(u.body.stmts)})
        return program, [f"removed unused qubit allocation {sym.name}"], {}
    decl = sym.decl
    if not isinstance(decl, (A.Let, A.Mutable)):
        raise Precondition(f"cannot remove {sym.kind} {sym.name}")
    repl = {id(decl): _demoted(decl.value, table)}
    for w in table.writes.get(sym.id, ()):
        repl[id(w)] = _demoted(w.value, table)
    if repl[id(decl)] and decl.comments:
        repl[id(decl)][0] = dataclasses.replace(repl[id(decl)][0], comments=decl.comments)
    program = splice_statements(ctx.program, repl)
    kept = sum(len(v) for v in repl.values())
    note = f" (kept {kept} effectful expression(s))" if kept else ""
    return program, [f"removed variable {sym.qualified}{note}"], {}


def reorder_instructions(ctx: Context, target: str, other: str | None = None):
    head, _, tail = target.partition(":")
    if other is None:
        if "," not in tail:
            raise Precondition("give two statement paths")
        tail, other = (x.strip() for x in tail.split(",", 1))
    ns, c, a = ctx.statement(f"{head}:{tail}")
    try:
        b = ctx.ref_at(c, parse_path(other.strip()))
    except ValueError as e:
        raise Precondition(str(e)) from None
    if a.block is not b.block:
        raise Precondition("statements are not in the same block")
    if a.position == b.position:
        return ctx.program, ["nothing to swap"], {}
    if a.position > b.position:
        a, b = b, a
    pdg = build_pdg(c, ctx.table)
    between = [r for r in iter_statements(c.body) if r.block is a.block and a.position < r.position < b.position]
    # every moved statement must commute with everything it jumps over
    checks = [(a, b)] + [(a, r) for r in between] + [(r, b) for r in between]
    for x, y in checks:
        e = pdg.blocking_edge(x.path, y.path)
        if e is not None:
            src, dst = pdg.nodes[e.src].path, pdg.nodes[e.dst].path
            label = f" ({e.label})" if e.label else ""
            raise Precondition(f"dependent statements: {e.kind} edge{label} from "
                               f"{format_path(src)} to {format_path(dst)}")
    for r in (a, b):
        if any(isinstance(n, A.Return) for n in r.stmt.walk()):
            raise Precondition("dependent statements: a return fixes the statement order")
    i, j = a.position, b.position

    def fn(orig, block):
        if orig is a.block:
            ss = list(block.stmts)
            ss[i], ss[j] = ss[j], ss[i]
            return dataclasses.replace(block, stmts=tuple(ss))
        return None
    program = rewrite(ctx.program, fn)
    return program, [f"swapped {format_path(a.path)} and {format_path(b.path)} in {ns}.{c.name}"], {}

