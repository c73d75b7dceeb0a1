"""Loop unrolling and its inverse, rolling repeated statements into a loop."""

from __future__ import annotations

import dataclasses

from ..syntax import ast as A
from .base import (
    Context, Precondition, all_names, check_identifier, fresh_name, int_expr, literal_value,
    remap, rewrite,
)
from .merge import fold_constants
from .unify import Mismatch, get_at, replace_at, unify_sequences

DEFAULT_UNROLL_LIMIT = 64


def _const_int(e) -> int | None:
    v = literal_value(fold_constants(e, set()))
    return v[1] if v is not None and v[0] == "Int" else None


def _replace_in_block(program, block, start, stop, new):
    def fn(orig, b):
        if orig is block:
            ss = list(b.stmts)
            ss[start:stop] = new
            return dataclasses.replace(b, stmts=tuple(ss))
        return None
    return rewrite(program, fn)


def unroll_loop(ctx: Context, target: str, limit: int = DEFAULT_UNROLL_LIMIT):
    ns, c, ref = ctx.statement(target)
    loop = ref.stmt
    table = ctx.table
    if not isinstance(loop, A.For) or not isinstance(loop.range, A.RangeExpr):
        raise Precondition("target must be a for loop over a range")
    lo, hi = _const_int(loop.range.lo), _const_int(loop.range.hi)
    if lo is None or hi is None:
        raise Precondition("non-constant bounds: loop range must fold to integer constants")
    count = max(0, hi - lo + 1)
    if count > int(limit):
        raise Precondition(f"unroll limit: {count} iterations exceed the limit of {limit}")
    if any(isinstance(n, A.Return) for n in loop.body.walk()):
        raise Precondition("loop body contains a return")
    var_sid = table.refs[id(loop)]
    # names declared directly in the body now share one scope across copies
    local = [(table.refs[id(s)], s.name) for s in loop.body.stmts if isinstance(s, (A.Let, A.Mutable))]
    outside = _names_outside(c, loop)
    taken = all_names(c)
    stmts = []
    for k in range(count):
        rename = {}
        for sid, name in local:
            if k == 0 and name not in outside:
                continue
            rename[sid] = fresh_name(name, taken)
            taken.add(rename[sid])
        body = remap(loop.body, table, rename=rename, subst={var_sid: int_expr(lo + k)})
        stmts.extend(body.stmts)
    if stmts and loop.comments:
        stmts[0] = dataclasses.replace(stmts[0], comments=loop.comments + stmts[0].comments)
    program = _replace_in_block(ctx.program, ref.block, ref.position, ref.position + 1, stmts)
    return program, [f"unrolled {count} iteration(s) of {ns}.{c.name}:{_fmt(ref.path)}"], {}


def _fmt(path) -> str:
    from ..analysis.index import format_path
    return format_path(path)


def _names_outside(c: A.Callable, loop: A.For) -> set[str]:
    inside = {id(n) for n in loop.walk()}
    return {getattr(n, f) for n in c.walk() if id(n) not in inside
            for t, f in ((A.Let, "name"), (A.Mutable, "name"), (A.Using, "name"), (A.For, "var"), (A.Param, "name"))
            if isinstance(n, t)}


def _groups(stmts: list, period: int) -> list[list]:
    return [stmts[i:i + period] for i in range(0, len(stmts), period)]


def _uniform(table, groups) -> dict | None:
    """Union of differing literal positions against the first group, or None."""
    positions: dict = {}
    try:
        for g in groups[1:]:
            positions.update(unify_sequences(table, groups[0], g))
    except Mismatch:
        return None
    return positions


def _loop_index(lo: int, d: int, var: str):
    i = A.Ident(var)
    term = i if abs(d) == 1 else A.Binary("*", A.IntLit(abs(d)), i)
    if lo == 0 and d > 0:
        return term
    return A.Binary("+" if d > 0 else "-", int_expr(lo), term)


def roll_loop(ctx: Context, target: str, var: str | None = None, period: int | None = None):
    rng = ctx.range(target)
    stmts = rng.stmts
    table = ctx.table
    if len(stmts) < 2:
        raise Precondition("need at least two statements to roll")
    periods = [int(period)] if period else [p for p in range(1, len(stmts) // 2 + 1)]
    chosen = None
    for p in periods:
        if p < 1 or len(stmts) % p or len(stmts) // p < 2:
            continue
        groups = _groups(stmts, p)
        positions = _uniform(table, groups)
        if positions is not None and len(positions) <= 1:
            chosen = (p, groups, positions)
            break
    if chosen is None:
        raise Precondition("not uniform: statements differ in more than one integer literal")
    p, groups, positions = chosen
    declared = [table.refs[id(n)] for s in stmts for n in s.walk()
                if isinstance(n, (A.Let, A.Mutable, A.Using, A.For)) and id(n) in table.refs]
    if declared and len(groups) > 1:
        after_ids = {table.refs.get(id(n)) for s in rng.after for n in s.walk()}
        if any(sid in after_ids for sid in declared):
            raise Precondition("a statement in the range defines a symbol used later")
    taken = all_names(rng.callable)
    if var:
        check_identifier(var, "loop variable")
        if var in taken:
            raise Precondition(f"name collision: {var!r} already used in {rng.callable.name}")
        v = var
    else:
        v = "i" if "i" not in taken else fresh_name("i", taken)
    body = A.Block(tuple(groups[0]))
    m = len(groups)
    if not positions:
        bounds = (1, m)
    else:
        (pos,) = positions
        values = []
        for g in groups:
            lit = literal_value(get_at(A.Block(tuple(g)), pos))
            if lit is None or lit[0] != "Int":
                raise Precondition("not uniform: the varying literal is not an Int")
            values.append(lit[1])
        d = values[1] - values[0]
        if any(values[k] != values[0] + k * d for k in range(m)):
            raise Precondition("not uniform: literals do not progress arithmetically")
        if d == 1:
            bounds = (values[0], values[-1])
            body = replace_at(body, pos, A.Ident(v))
        else:
            bounds = (0, m - 1)
            body = replace_at(body, pos, _loop_index(values[0], d, v))
    comments = stmts[0].comments
    body = dataclasses.replace(body, stmts=(dataclasses.replace(body.stmts[0], comments=()),) + body.stmts[1:])
    loop = A.For(v, A.RangeExpr(int_expr(bounds[0]), int_expr(bounds[1])), body, comments=comments)
    program = _replace_in_block(ctx.program, rng.block, rng.start, rng.stop, [loop])
    return program, [f"rolled {m} cop(ies) of {p} statement(s) at {rng.label()} into a loop over {v}"], {}
