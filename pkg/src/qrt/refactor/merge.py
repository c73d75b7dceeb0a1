"""Merge, parameterize and specialize operations."""

from __future__ import annotations

import dataclasses
import re

from ..analysis.pdg import header_exprs
from ..analysis.symbols import analyze
from ..sim.interpreter import wrap_int
from ..syntax import ast as A
from .base import (
    Context, Precondition, all_names, check_identifier, fresh_name, literal_node, literal_value,
    remap, rewrite,
)
from .extract import callee_signature, insert_callables
from .unify import Mismatch, literal_positions, replace_at, unify_callables, get_at


def _target_list(ctx: Context, targets) -> list[tuple[str, A.Callable]]:
    if isinstance(targets, str):
        targets = [t.strip() for t in targets.split(",") if t.strip()]
    out = []
    for t in targets:
        ns, c = ctx.callable(t)
        if any(c is x for _, x in out):
            raise Precondition(f"{c.name} listed twice")
        out.append((ns, c))
    return out


def _retarget(ctx: Context, program_node, old_sids: dict[int, tuple[str, tuple]]):
    """Rewrite calls of the given callables: sid -> (new name, extra trailing args)."""
    table = ctx.table

    def fn(orig, new):
        if isinstance(orig, (A.Call, A.Ident)):
            sid = table.refs.get(id(orig))
            if sid in old_sids:
                name, extra = old_sids[sid]
                if isinstance(orig, A.Call):
                    return dataclasses.replace(new, callee=name, args=new.args + tuple(extra))
                return dataclasses.replace(new, name=name)
        return None
    return rewrite(program_node, fn)


# ------------------------------------------------------------------ merge


def merge_operations(ctx: Context, targets, merged_name: str | None = None, param_name: str | None = None):
    items = _target_list(ctx, targets)
    if len(items) != 2:
        raise Precondition("merge needs exactly two operations")
    (ns_a, a), (ns_b, b) = items
    if a.kind != b.kind:
        raise Precondition("signatures differ: one is a function, the other an operation")
    if len(a.params) != len(b.params) or [p.type for p in a.params] != [p.type for p in b.params] \
            or a.return_type != b.return_type:
        raise Precondition("signatures differ")
    try:
        diffs = unify_callables(ctx.table, a, b)
    except Mismatch as e:
        raise Precondition(f"bodies not unifiable: {e}") from None
    if len(diffs) == 1:
        return parameterize_operation(ctx, [f"{ns_a}.{a.name}", f"{ns_b}.{b.name}"],
                                      param_name=param_name, new_name=merged_name)
    if diffs:
        raise Precondition(f"bodies not unifiable: they differ at {len(diffs)} literal positions")
    sym_a, sym_b = ctx.callable_sym(a), ctx.callable_sym(b)
    if sym_b.qualified in ctx.entry_names():
        raise Precondition(f"{sym_b.qualified} is an entry point and cannot be removed")
    name = a.name
    if merged_name and merged_name != a.name:
        check_identifier(merged_name, "merged name")
        if ctx.namespace(ns_a).find(merged_name) is not None and merged_name != b.name:
            raise Precondition(f"name collision: {ns_a} already declares {merged_name!r}")
        name = merged_name
    mapping = {sym_b.id: (name, ())}
    if name != a.name:
        mapping[sym_a.id] = (name, ())
    program = _retarget(ctx, ctx.program, mapping)
    namespaces = []
    for ns in program.namespaces:
        cs = []
        for c in ns.callables:
            if ns.name == ns_b and c.name == b.name:
                continue
            if ns.name == ns_a and c.name == a.name and name != a.name:
                c = dataclasses.replace(c, name=name)
            cs.append(c)
        namespaces.append(dataclasses.replace(ns, callables=tuple(cs)))
    program = dataclasses.replace(program, namespaces=tuple(namespaces))
    renamed = {sym_b.qualified: f"{ns_a}.{name}"}
    if name != a.name:
        renamed[sym_a.qualified] = f"{ns_a}.{name}"
    _check_bindings(ctx, program, renamed)
    return program, [f"merged {sym_b.qualified} into {ns_a}.{name}"], renamed


def _check_bindings(ctx: Context, program: A.Program, renamed: dict[str, str]) -> None:
    table, diags = analyze(program)
    if diags:
        raise Precondition(f"result does not resolve: {diags[0].message}")
    old = callee_signature(ctx.table, renamed)
    new = callee_signature(table)
    for q, refs in new.items():
        if q in old and old[q] != refs:
            raise Precondition(f"calls in {q} would bind to different callables")


# ------------------------------------------------------------ parameterize


def _default_param(type_name: str) -> str:
    return "n" if type_name == "Int" else "value"


def parameterize_operation(ctx: Context, targets, param_name: str | None = None,
                           new_name: str | None = None, index: int = 0):
    items = _target_list(ctx, targets)
    if not items:
        raise Precondition("no operations given")
    ns0, first = items[0]
    if any(ns != ns0 for ns, _ in items):
        raise Precondition("targets must share a namespace")
    syms = [ctx.callable_sym(c) for _, c in items]
    for s in syms:
        if ctx.gate_refs(s):
            raise Precondition(f"{s.name} is passed as a gate argument; its signature is fixed")
        if s.qualified in ctx.entry_names():
            raise Precondition(f"{s.qualified} is an entry point; its signature is fixed")
    if len(items) == 1:
        positions = literal_positions(first.body)
        if not positions:
            raise Precondition(f"{first.name} contains no literal to parameterize")
        if not 0 <= int(index) < len(positions):
            raise Precondition(f"literal index {index} out of range")
        pos = positions[int(index)]
        lit = literal_value(get_at(first.body, pos))
        chosen = [pos]
        values = [lit]
    else:
        diffs: dict = {}
        for _, other in items[1:]:
            if other.kind != first.kind:
                raise Precondition("structural mismatch: mixed functions and operations")
            try:
                d = unify_callables(ctx.table, first, other)
            except Mismatch as e:
                raise Precondition(f"structural mismatch: {e}") from None
            for pos in d:
                diffs.setdefault(pos, None)
        if not diffs:
            raise Precondition("bodies are identical; nothing to parameterize")
        chosen = list(diffs)
        values = []
        for _, c in items:
            vals = {literal_value(get_at(c.body, pos)) for pos in chosen}
            if len({t for t, _ in vals}) > 1:
                raise Precondition("mixed literal types at the differing positions")
            if len(vals) > 1:
                raise Precondition("differing positions need more than one parameter")
            values.append(vals.pop())
        types = {t for t, _ in values}
        if len(types) > 1:
            raise Precondition("mixed literal types across operations")
    type_name = values[0][0]
    locals_ = {s.name for s in ctx.table.locals_of(syms[0].qualified)}
    if param_name:
        check_identifier(param_name, "parameter name")
        if param_name in locals_:
            raise Precondition(f"name collision: {param_name!r} already declared in {first.name}")
        pname = param_name
    else:
        base = _default_param(type_name)
        pname = base if base not in locals_ else fresh_name(base, locals_)
    names_in_ns = {c.name for c in ctx.namespace(ns0).callables} - {c.name for _, c in items}
    if new_name:
        check_identifier(new_name, "new name")
        if new_name in names_in_ns:
            raise Precondition(f"name collision: {ns0} already declares {new_name!r}")
        name = new_name
    elif len(items) == 1:
        name = first.name
    else:
        base = re.sub(r"\d+$", "", first.name) or first.name
        name = base if base not in names_in_ns else fresh_name(base, names_in_ns)
    mapping = {s.id: (name, (literal_node(type_name, v),)) for s, (_, v) in zip(syms, values)}
    program = _retarget(ctx, ctx.program, mapping)
    # retargeting only appends arguments, so the literal positions are still valid
    body = program.namespace(ns0).find(first.name).body
    for pos in chosen:
        body = replace_at(body, pos, A.Ident(pname))
    new_callable = dataclasses.replace(first, name=name, body=body,
                                       params=first.params + (A.Param(pname, A.Type(type_name)),))
    drop = {c.name for _, c in items[1:]}
    namespaces = []
    for ns in program.namespaces:
        if ns.name == ns0:
            cs = []
            for c in ns.callables:
                if c.name in drop:
                    continue
                if c.name == first.name:
                    c = new_callable
                cs.append(c)
            ns = dataclasses.replace(ns, callables=tuple(cs))
        namespaces.append(ns)
    program = dataclasses.replace(program, namespaces=tuple(namespaces))
    return program, [
        f"parameterized {', '.join(s.qualified for s in syms)} as {ns0}.{name}({pname} : {type_name})",
        "call sites pass " + ", ".join(str(v) for _, v in values),
    ], {}


# -------------------------------------------------------------- specialize


def _value_tag(type_name: str, v) -> str:
    if type_name == "Bool":
        return "true" if v else "false"
    text = str(v)
    text = text.replace("-", "m").replace(".", "p").replace("+", "")
    return re.sub(r"[^A-Za-z0-9_]", "", text) or "v"


def fold_constants(node: A.Node, protected: set[str]) -> A.Node:
    """Fold literal arithmetic and ``if`` statements with literal conditions."""
    def fn(orig, new):
        if isinstance(new, A.Binary):
            return _fold_binary(new)
        if isinstance(new, A.Unary) and new.op == "not" and isinstance(new.operand, A.BoolLit):
            return A.BoolLit(not new.operand.value)
        if isinstance(new, A.Block):
            out, changed = [], False
            for s in new.stmts:
                chosen = _chosen_block(s)
                if chosen is None:
                    out.append(s)
                    continue
                declared = {x.name for x in chosen.stmts if isinstance(x, (A.Let, A.Mutable))}
                if declared & protected:
                    out.append(s)
                    continue
                out.extend(chosen.stmts)
                changed = True
            return dataclasses.replace(new, stmts=tuple(out)) if changed else None
        return None
    return rewrite(node, fn)


def _chosen_block(s) -> A.Block | None:
    if not isinstance(s, A.If):
        return None
    arms = [(s.cond, s.then), *((e.cond, e.body) for e in s.elifs)]
    for cond, block in arms:
        if not isinstance(cond, A.BoolLit):
            return None
        if cond.value:
            return block
    return s.else_ if s.else_ is not None else A.Block(())


def _fold_binary(e: A.Binary):
    la, lb = literal_value(e.lhs), literal_value(e.rhs)
    if la is None or lb is None or la[0] != lb[0]:
        return None
    (t, a), (_, b) = la, lb
    op = e.op
    try:
        if op in ("==", "!="):
            return A.BoolLit((a == b) == (op == "=="))
        if t == "Bool" and op in ("and", "or"):
            return A.BoolLit((a and b) if op == "and" else (a or b))
        if t in ("Int", "Double"):
            if op in ("<", "<=", ">", ">="):
                return A.BoolLit({"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op])
            if op in ("+", "-", "*"):
                r = {"+": a + b, "-": a - b, "*": a * b}[op]
                return literal_node(t, wrap_int(r) if t == "Int" else r)
    except TypeError:
        return None
    return None


def specialize_operation(ctx: Context, target: str, new_name: str | None = None, callee: str | None = None):
    ns, c, ref = ctx.statement(target)
    table = ctx.table
    calls = []
    for e in header_exprs(ref.stmt):
        for n in e.walk():
            if isinstance(n, A.Call) and table.symbol_of(n) is not None:
                if callee is None or n.callee == callee:
                    calls.append(n)
    if not calls:
        raise Precondition("statement has no call to a user callable")
    call = calls[0]
    fsym = table.symbol_of(call)
    f = fsym.decl
    fixed = []
    for i, (p, arg) in enumerate(zip(f.params, call.args)):
        lit = literal_value(arg)
        if lit is not None and not p.type.is_quantum:
            fixed.append((i, p, lit))
    if not fixed:
        raise Precondition("no literal arguments at this call site")
    f_ns = fsym.namespace
    taken = {x.name for x in ctx.namespace(f_ns).callables}
    if new_name:
        check_identifier(new_name, "new name")
        if new_name in taken:
            raise Precondition(f"name collision: {f_ns} already declares {new_name!r}")
        name = new_name
    else:
        base = f"{f.name}_" + "_".join(_value_tag(t, v) for _, _, (t, v) in fixed)
        name = base if base not in taken else fresh_name(base, taken | all_names(ctx.program))
    subst = {table.refs[id(p)]: literal_node(t, v) for _, p, (t, v) in fixed}
    drop = {i for i, _, _ in fixed}
    body = remap(f.body, table, subst=subst)
    body = fold_constants(body, all_names(f))
    params = tuple(p for i, p in enumerate(f.params) if i not in drop)
    special = dataclasses.replace(f, name=name, params=params, body=body)

    def fn(orig, new):
        if orig is call:
            return dataclasses.replace(new, callee=name,
                                       args=tuple(a for i, a in enumerate(new.args) if i not in drop))
        return None
    program = rewrite(ctx.program, fn)
    program = insert_callables(program, f_ns, f.name, [special])
    vals = ", ".join(f"{p.name} = {v}" for _, p, (_, v) in fixed)
    return program, [f"specialized {fsym.qualified} with {vals} as {f_ns}.{name}"], {}
