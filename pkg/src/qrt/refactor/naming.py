"""Rename and change-signature refactorings."""

from __future__ import annotations

import dataclasses

from ..analysis.rewrite import rename_symbols
from ..analysis.symbols import SymbolTable, analyze
from ..analysis.unused import ENTRY_NAME
from ..syntax import ast as A
from ..syntax.diagnostics import DiagnosticError
from ..syntax.parser import parse_expr, parse_type
from .base import Context, Precondition, check_identifier, has_effects, rewrite


def binding_fingerprint(table: SymbolTable) -> list[tuple[int, int]]:
    """For each reference in preorder, the preorder position of its declaration."""
    order = {id(n): k for k, n in enumerate(table.program.walk())}
    out = []
    for k, n in enumerate(table.program.walk()):
        sid = table.refs.get(id(n))
        if sid is not None:
            out.append((k, order.get(id(table.symbols[sid].decl), -1)))
    return out


def rename(ctx: Context, target: str, new_name: str):
    table = ctx.table
    sym = ctx.symbol(target)
    if sym.name == new_name:
        return ctx.program, [f"{sym.name} already has that name"], {}
    check_identifier(new_name, "new name")
    if sym.kind == "callable":
        if ENTRY_NAME in (sym.name, new_name):
            raise Precondition(f"renaming to or from {ENTRY_NAME} changes the program's entry points")
        if f"{sym.namespace}.{new_name}" in table.callables:
            raise Precondition(f"name collision: {sym.namespace} already declares {new_name!r}")
    else:
        clash = [s for s in table.locals_of(sym.owner) if s.name == new_name]
        if clash:
            raise Precondition(f"name collision: {new_name!r} is already declared in {sym.owner}")
    new = rename_symbols(ctx.program, table, {sym.id: new_name})
    new_table, diags = analyze(new)
    if diags or binding_fingerprint(new_table) != binding_fingerprint(table):
        raise Precondition(f"name collision: renaming to {new_name!r} would change what some name refers to")
    renamed = {}
    if sym.kind == "callable":
        renamed[sym.qualified] = f"{sym.namespace}.{new_name}"
    return new, [f"renamed {sym.kind} {sym.name} to {new_name}"], renamed


# ---------------------------------------------------------- change_signature


def parse_param_spec(spec) -> tuple[str, A.Type, A.Node]:
    """``"name:Type=default"`` (or a mapping with those keys) -> parts."""
    if isinstance(spec, dict):
        name, tname, default = spec.get("name"), spec.get("type"), spec.get("default")
    else:
        head, eq, default = str(spec).partition("=")
        name, colon, tname = head.partition(":")
        if not colon or not eq:
            raise Precondition("parameter spec must look like name:Type=default")
    if name is None or tname is None or default is None:
        raise Precondition("added parameter needs a name, a type and a default")
    name = str(name).strip()
    check_identifier(name, "parameter name")
    try:
        t = parse_type(str(tname).strip())
        e = parse_expr(str(default).strip())
    except DiagnosticError as err:
        raise Precondition(f"bad parameter spec: {err.diagnostics[0].message}") from None
    if t.is_quantum:
        raise Precondition("an added parameter must be classical")
    if any(isinstance(n, (A.Ident, A.Call, A.ControlledApply)) for n in e.walk()):
        raise Precondition("the default must be a closed classical expression")
    return name, t, e


def parse_permutation(spec, n: int) -> list[int]:
    if isinstance(spec, str):
        try:
            perm = [int(x) for x in spec.replace(" ", "").split(",") if x]
        except ValueError:
            raise Precondition(f"not a permutation: {spec!r}") from None
    else:
        perm = [int(x) for x in spec]
    if sorted(perm) != list(range(n)):
        raise Precondition(f"not a permutation of 0..{n - 1}: {perm}")
    return perm


def change_signature(ctx: Context, target: str, add=None, remove: str | None = None, reorder=None):
    if sum(x is not None for x in (add, remove, reorder)) != 1:
        raise Precondition("give exactly one of add, remove, reorder")
    ns, c = ctx.callable(target)
    sym = ctx.callable_sym(c)
    if ctx.gate_refs(sym):
        raise Precondition(f"{c.name} is passed as a gate argument; its signature is fixed")
    if sym.qualified in ctx.entry_names():
        raise Precondition(f"{c.name} is an entry point; its signature is the program interface")
    sites = ctx.call_sites(sym)
    params = list(c.params)
    if add is not None:
        name, t, default = parse_param_spec(add)
        if any(s.name == name for s in ctx.table.locals_of(sym.qualified)):
            raise Precondition(f"name collision: {name!r} already declared in {c.name}")
        new_params = params + [A.Param(name, t)]

        def new_args(args):
            return list(args) + [default]
        change = f"added parameter {name} : {t} to {c.name}"
    elif remove is not None:
        matches = [i for i, p in enumerate(params) if p.name == remove]
        if not matches:
            raise Precondition(f"{c.name} has no parameter {remove!r}")
        i = matches[0]
        psym = ctx.table.symbol_of(params[i])
        if ctx.table.use_count(psym):
            raise Precondition(f"parameter used: {remove!r} is read in {c.name}")
        for call in sites:
            if has_effects(call.args[i], ctx.table):
                raise Precondition(f"an argument passed for {remove!r} has effects")
        new_params = params[:i] + params[i + 1:]

        def new_args(args):
            return list(args[:i]) + list(args[i + 1:])
        change = f"removed parameter {remove} from {c.name}"
    else:
        perm = parse_permutation(reorder, len(params))
        if perm == list(range(len(params))):
            return ctx.program, ["identity permutation; nothing to reorder"], {}
        for call in sites:
            if sum(has_effects(a, ctx.table) for a in call.args) > 1:
                raise Precondition("reordering would change the evaluation order of effectful arguments")
        new_params = [params[k] for k in perm]

        def new_args(args):
            return [args[k] for k in perm]
        change = f"reordered parameters of {c.name} to ({', '.join(p.name for p in new_params)})"
    site_ids = {id(call) for call in sites}

    def fn(orig, new):
        if id(orig) in site_ids:
            return dataclasses.replace(new, args=tuple(new_args(new.args)))
        if orig is c:
            return dataclasses.replace(new, params=tuple(new_params))
        return None
    return rewrite(ctx.program, fn), [change, f"updated {len(sites)} call site(s)"], {}
