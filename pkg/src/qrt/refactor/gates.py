"""Gate-level refactorings: merging, substitution, qubit order, measurement consolidation."""

from __future__ import annotations

import dataclasses

from ..analysis.index import iter_statements
from ..analysis.qubits import any_conflict, conflicts, qubit_refs
from ..analysis.symbols import SymbolTable
from ..syntax import ast as A
from ..syntax.builtins import BUILTINS
from .base import (
    Context, Precondition, StmtRange, all_names, check_identifier, fresh_name, int_expr,
    literal_value, rewrite,
)
from .gaterules import PAIR_REDUCTIONS, RULES_BY_NAME, SUBSTITUTION_RULES, GateApp


def same_operand(table: SymbolTable, a, b) -> bool:
    """Structurally equal expressions whose names denote the same symbols."""
    if a != b:
        return False
    return all(table.refs.get(id(x)) == table.refs.get(id(y)) for x, y in zip(a.walk(), b.walk()))


def _gate_call(stmt):
    if isinstance(stmt, A.CallStmt) and isinstance(stmt.expr, A.Call):
        call = stmt.expr
        b = BUILTINS.get(call.callee)
        if b is not None and b.kind == "gate":
            return call
    return None


def _reads(exprs, table: SymbolTable) -> set[int]:
    return {table.refs[id(n)] for e in exprs for n in e.walk()
            if isinstance(n, A.Ident) and id(n) in table.refs}


def _blocks_merge(stmt, operand_refs, operand_reads, table: SymbolTable) -> bool:
    if any(isinstance(n, A.Return) for n in stmt.walk()):
        return True
    if any_conflict(qubit_refs(stmt, table), operand_refs):
        return True
    return any(isinstance(n, A.Set) and table.refs.get(id(n)) in operand_reads for n in stmt.walk())


def reduce_block(stmts: list, table: SymbolTable, lo: int = 0, hi: int | None = None) -> tuple[list, int]:
    """Apply pair reductions to fixpoint. Items are original indices or new statements."""
    items: list = list(range(len(stmts)))
    hi = len(stmts) if hi is None else hi
    node = lambda it: stmts[it] if isinstance(it, int) else it  # noqa: E731
    in_range = lambda it: not isinstance(it, int) or lo <= it < hi  # noqa: E731
    applied = 0
    changed = True
    while changed:
        changed = False
        for i, it in enumerate(items):
            call = _gate_call(node(it))
            if call is None or call.callee not in PAIR_REDUCTIONS or not in_range(it):
                continue
            refs = [r for a in call.args for r in qubit_refs(a, table)]
            reads = _reads(call.args, table)
            for j in range(i + 1, len(items)):
                other = node(items[j])
                oc = _gate_call(other)
                if (oc is not None and oc.callee == call.callee and in_range(items[j])
                        and len(oc.args) == len(call.args)
                        and all(same_operand(table, x, y) for x, y in zip(call.args, oc.args))):
                    rep = PAIR_REDUCTIONS[call.callee]
                    new = [] if rep is None else [A.CallStmt(A.Call(rep, call.args), comments=node(it).comments)]
                    items[i:i + 1] = new
                    del items[j - 1 + len(new)]
                    changed = True
                    applied += 1
                    break
                if _blocks_merge(other, refs, reads, table):
                    break
            if changed:
                break
    return items, applied


def _apply_items(new_block: A.Block, items: list) -> tuple:
    return tuple(new_block.stmts[it] if isinstance(it, int) else it for it in items)


def merge_gates(ctx: Context, target: str):
    ns, c, tail = ctx.split_target(target)
    table = ctx.table
    plans: dict[int, list] = {}
    total = 0
    if tail:
        rng = ctx.range_in(ns, c, tail)
        items, n = reduce_block(list(rng.block.stmts), table, rng.start, rng.stop)
        if n:
            plans[id(rng.block)] = items
        total += n
    else:
        seen = set()
        for block in [c.body] + [b for r in iter_statements(c.body) for b in A.child_blocks(r.stmt)]:
            if id(block) in seen:
                continue
            seen.add(id(block))
            items, n = reduce_block(list(block.stmts), table)
            if n:
                plans[id(block)] = items
            total += n
    if not total:
        return ctx.program, ["no adjacent gate pair matches a rule"], {}

    def fn(orig, new):
        items = plans.get(id(orig))
        return dataclasses.replace(new, stmts=_apply_items(new, items)) if items is not None else None
    return rewrite(ctx.program, fn), [f"applied {total} gate reduction(s) in {ns}.{c.name}"], {}


# -------------------------------------------------------------- replace_gate


def _match_app(table: SymbolTable, stmt, app: GateApp, wires: dict[int, A.Node]) -> bool:
    if not isinstance(stmt, A.CallStmt):
        return False
    e = stmt.expr
    if app.controlled:
        if not (isinstance(e, A.ControlledApply) and e.gate == app.gate and isinstance(e.controls, A.ArrayLit)
                and len(e.controls.items) == len(app.wires) - 1 and len(e.args) == 1):
            return False
        operands = list(e.controls.items) + [e.args[0]]
    else:
        if not (isinstance(e, A.Call) and e.callee == app.gate and len(e.args) == len(app.wires)):
            return False
        operands = list(e.args)
    for w, x in zip(app.wires, operands):
        if w in wires:
            if not same_operand(table, wires[w], x):
                return False
        else:
            wires[w] = x
    return True


def _build_app(app: GateApp, wires: dict[int, A.Node]):
    ops = [wires[w] for w in app.wires]
    if app.controlled:
        return A.CallStmt(A.ControlledApply(app.gate, A.ArrayLit(tuple(ops[:-1])), (ops[-1],)))
    return A.CallStmt(A.Call(app.gate, tuple(ops)))


def replace_gate(ctx: Context, target: str, rule: str):
    r = RULES_BY_NAME.get(rule)
    if r is None or r not in SUBSTITUTION_RULES:
        names = ", ".join(x.name for x in SUBSTITUTION_RULES)
        raise Precondition(f"unknown substitution rule {rule!r} (choose from {names})")
    ns, c, tail = ctx.split_target(target)
    if not tail:
        raise Precondition("target needs a statement path")
    rng = ctx.range_in(ns, c, tail)
    if len(rng.stmts) == 1 and len(r.lhs) > 1:
        if rng.start + len(r.lhs) > len(rng.block.stmts):
            raise Precondition("rule/target mismatch: not enough statements")
        rng = StmtRange(c, ns, rng.block, rng.start, rng.start + len(r.lhs), rng.refs)
    if len(rng.stmts) != len(r.lhs):
        raise Precondition(f"rule/target mismatch: {r.name} rewrites {len(r.lhs)} statement(s)")
    wires: dict[int, A.Node] = {}
    for stmt, app in zip(rng.stmts, r.lhs):
        if not _match_app(ctx.table, stmt, app, wires):
            raise Precondition(f"rule/target mismatch: statement does not match {app}")
    new = [_build_app(app, wires) for app in r.rhs]
    if new and rng.stmts[0].comments:
        new[0] = dataclasses.replace(new[0], comments=rng.stmts[0].comments)

    def fn(orig, block):
        if orig is rng.block:
            ss = list(block.stmts)
            ss[rng.start:rng.stop] = new
            return dataclasses.replace(block, stmts=tuple(ss))
        return None
    return rewrite(ctx.program, fn), [f"applied {r.name} at {rng.label()}"], {}


# -------------------------------------------------------------- order_qubits


def _parents(node: A.Node) -> dict[int, A.Node]:
    out = {}
    for n in node.walk():
        for ch in n.children():
            out[id(ch)] = n
    return out


def order_qubits(ctx: Context, target: str, permutation):
    from .naming import parse_permutation

    ns, c, ref = ctx.statement(target)
    u = ref.stmt
    table = ctx.table
    if not isinstance(u, A.Using) or u.size is None:
        raise Precondition("target must be a using block allocating a qubit array")
    size = literal_value(u.size)
    if size is None or size[0] != "Int":
        raise Precondition("qubit array size must be a constant")
    n = size[1]
    perm = parse_permutation(permutation, n)
    sid = table.refs[id(u)]
    parents = _parents(u.body)
    indexed, whole = [], 0
    for use in table.uses.get(sid, ()):
        parent = parents.get(id(use))
        if isinstance(parent, A.Index) and parent.base is use:
            k = literal_value(parent.index)
            if k is None or k[0] != "Int":
                raise Precondition("non-constant index into the qubit array")
            if not 0 <= k[1] < n:
                raise Precondition(f"index {k[1]} is out of range for Qubit[{n}]")
            indexed.append((parent, k[1]))
        elif isinstance(parent, A.Slice) and parent.base is use:
            raise Precondition("the qubit array is sliced; slices cannot be relabelled")
        else:
            whole += 1
    if perm == list(range(n)) or not indexed:
        return ctx.program, ["no index rewrites needed"], {}
    if whole:
        raise Precondition("the array is also used as a whole, so its order is observable")
    targets = {id(e): k for e, k in indexed}

    def fn(orig, new):
        k = targets.get(id(orig))
        return dataclasses.replace(new, index=int_expr(perm[k])) if k is not None else None
    return rewrite(ctx.program, fn), [f"relabelled {len(indexed)} index(es) of {u.name} by {perm}"], {}


# ------------------------------------------------- consolidate_measurements


def consolidate_measurements(ctx: Context, target: str, name: str | None = None):
    rng = ctx.range(target)
    stmts = rng.stmts
    table = ctx.table
    if len(stmts) < 2:
        raise Precondition("need k >= 2 measurement bindings")
    qubits = []
    for s in stmts:
        if not (isinstance(s, A.Let) and isinstance(s.value, A.Call) and s.value.callee == "M"
                and table.symbol_of(s.value) is None):
            raise Precondition("every statement must be `let r = M(q);`")
        qubits.append(s.value.args[0])
    refs = [qubit_refs(q, table) for q in qubits]
    for i in range(len(refs)):
        for j in range(i + 1, len(refs)):
            if any(conflicts(x, y) for x in refs[i] for y in refs[j]):
                raise Precondition("duplicate qubit: two measurements may act on the same qubit")
    bound = {table.refs[id(s)] for s in stmts}
    for s in stmts:
        if any(table.refs.get(id(n)) in bound for n in s.value.walk()):
            raise Precondition("intervening dependence: a result is used inside the range")
    taken = all_names(rng.callable)
    if name:
        check_identifier(name, "result array name")
        if name in taken:
            raise Precondition(f"name collision: {name!r} already used in {rng.callable.name}")
        rs = name
    else:
        rs = "rs" if "rs" not in taken else fresh_name("rs", taken)
    new = [A.Let(rs, A.Call("MultiM", (A.ArrayLit(tuple(qubits)),)), comments=stmts[0].comments)]
    new += [A.Let(s.name, A.Index(A.Ident(rs), A.IntLit(i))) for i, s in enumerate(stmts)]

    def fn(orig, block):
        if orig is rng.block:
            ss = list(block.stmts)
            ss[rng.start:rng.stop] = new
            return dataclasses.replace(block, stmts=tuple(ss))
        return None
    return rewrite(ctx.program, fn), [f"consolidated {len(stmts)} measurements at {rng.label()} into {rs}"], {}
