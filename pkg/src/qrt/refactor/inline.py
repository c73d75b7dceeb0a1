"""Inline a user callable at one call site or at all of them."""

from __future__ import annotations

import dataclasses

from ..analysis.rewrite import declared_in
from ..syntax import ast as A
from .base import (
    Context, Precondition, all_names, fresh_name, reaches, remap, resolves_to, splice_statements,
)

_PURE_ARGS = (A.IntLit, A.DoubleLit, A.BoolLit, A.StringLit, A.ResultLit, A.Ident)


def _site_call(stmt, callee: str | None):
    """The call a statement-level site makes, with how its value is used."""
    if isinstance(stmt, A.CallStmt) and isinstance(stmt.expr, A.Call):
        call, use = stmt.expr, "discard"
    elif isinstance(stmt, (A.Let, A.Mutable, A.Set)) and isinstance(stmt.value, A.Call):
        call, use = stmt.value, type(stmt).__name__
    else:
        return None, None
    if callee is not None and call.callee != callee:
        return None, None
    return call, use


def _check_callee(ctx: Context, f: A.Callable) -> None:
    fsym = ctx.callable_sym(f)
    if reaches(ctx.table, f, fsym.id):
        raise Precondition(f"{f.name} is recursive")
    returns = [n for n in f.body.walk() if isinstance(n, A.Return)]
    if returns and (len(returns) > 1 or f.body.stmts[-1] is not returns[0]):
        raise Precondition(f"{f.name} has multiple returns or an early return")


def _expand(ctx: Context, site_ns: str, caller: A.Callable, stmt, call: A.Call, use: str,
            f: A.Callable, taken: set[str]) -> list:
    table = ctx.table
    if caller.kind == "function" and f.is_operation:
        raise Precondition("cannot inline an operation into a function")
    for n in f.body.walk():
        sym = table.symbol_of(n) if isinstance(n, (A.Call, A.Ident)) else None
        if sym is not None and sym.kind == "callable":
            if resolves_to(table, site_ns, sym.name) != sym.qualified:
                raise Precondition(f"{f.name} refers to {sym.qualified}, which {caller.name} cannot see")
    prelude, subst, rename = [], {}, {}
    for p, arg in zip(f.params, call.args):
        psid = table.refs[id(p)]
        arg_sym = table.symbol_of(arg) if isinstance(arg, A.Ident) else None
        quantum = p.type.is_quantum
        if quantum or (isinstance(arg, _PURE_ARGS) and (arg_sym is None or arg_sym.kind != "callable")):
            subst[psid] = arg
            continue
        name = p.name if p.name not in taken else fresh_name(p.name, taken)
        taken.add(name)
        prelude.append(A.Let(name, arg))
        subst[psid] = A.Ident(name)
    for sid in declared_in(f.body.stmts, table):
        name = table.symbols[sid].name
        if name in taken:
            new = fresh_name(name, taken)
            rename[sid] = new
            taken.add(new)
        else:
            taken.add(name)
    body = [remap(s, table, rename, subst) for s in f.body.stmts]
    if f.return_type != A.UNIT:
        ret = body.pop()
        if use == "discard":
            if any(isinstance(n, (A.Call, A.ControlledApply)) for n in ret.value.walk()):
                if not isinstance(ret.value, A.Call):
                    raise Precondition("discarded return value has effects that cannot be kept")
                body.append(A.CallStmt(ret.value))
        else:
            body.append(dataclasses.replace(stmt, value=ret.value, span=stmt.span))
    return prelude + body


def inline_callable(ctx: Context, target: str, callee: str | None = None):
    ns, c, tail = ctx.split_target(target)
    table = ctx.table
    if tail:
        # one call site: the statement at the given path
        ref = ctx.ref_at(c, tuple(int(x) for x in tail.split(".")))
        call, use = _site_call(ref.stmt, callee)
        if call is None:
            raise Precondition("statement is not a call site (call must be the whole statement or initializer)")
        fsym = table.symbol_of(call)
        if fsym is None:
            raise Precondition(f"{call.callee} is a builtin and cannot be inlined")
        f = fsym.decl
        _check_callee(ctx, f)
        taken = all_names(c)
        new_stmts = _expand(ctx, ns, c, ref.stmt, call, use, f, taken)
        program = splice_statements(ctx.program, {id(ref.stmt): new_stmts})
        return program, [f"inlined {f.name} at {ns}.{c.name}:{tail}"], {}
    # every call site of the callable ``c``
    f = c
    fsym = ctx.callable_sym(f)
    _check_callee(ctx, f)
    sites = ctx.call_sites(fsym)
    if not sites:
        raise Precondition(f"{f.name} has no call sites")
    owners = {}
    for _, caller in ctx.program.callables():
        for s in caller.body.walk():
            call, use = _site_call(s, f.name) if isinstance(s, A.STATEMENTS) else (None, None)
            if call is not None and table.symbol_of(call) is fsym:
                owners[id(call)] = (caller, s, use)
    replacements, per_caller = {}, {}
    for call in sites:
        if id(call) not in owners:
            raise Precondition(f"a call of {f.name} is nested in an expression")
        caller, stmt, use = owners[id(call)]
        caller_ns = table.namespace_of[id(caller)]
        taken = per_caller.setdefault(id(caller), all_names(caller))
        replacements[id(stmt)] = _expand(ctx, caller_ns, caller, stmt, call, use, f, taken)
    program = splice_statements(ctx.program, replacements)
    changes = [f"inlined {f.name} at {len(sites)} call site(s)"]
    if not ctx.gate_refs(fsym) and fsym.qualified not in ctx.entry_names():
        program = dataclasses.replace(program, namespaces=tuple(
            dataclasses.replace(n, callables=tuple(x for x in n.callables if x.name != f.name))
            if n.name == ns else n for n in program.namespaces))
        changes.append(f"removed {fsym.qualified}")
    return program, changes, {}
