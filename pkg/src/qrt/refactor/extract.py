"""Extraction refactorings: operations, functions, splits, clones and namespaces."""

from __future__ import annotations

import dataclasses

from ..analysis.duplicates import find_duplicates
from ..analysis.index import Path, iter_statements, parse_range
from ..analysis.rewrite import declared_in, referenced_in, rename_symbols
from ..analysis.safety import is_operation_call
from ..analysis.symbols import Symbol, SymbolTable, analyze
from ..syntax import ast as A
from .base import (
    Context, Precondition, StmtRange, all_names, check_identifier, check_namespace_name,
    fresh_name, rewrite,
)


# ------------------------------------------------------------------ helpers


def edit_blocks(node: A.Node, edits: dict[int, object]) -> A.Node:
    """Apply ``edits[id(block)](stmts) -> stmts`` to the given blocks (nesting allowed)."""
    def fn(orig, new):
        f = edits.get(id(orig))
        return dataclasses.replace(new, stmts=tuple(f(list(new.stmts)))) if f else None
    return rewrite(node, fn)


def insert_callables(program: A.Program, ns_name: str, after: str, new_callables) -> A.Program:
    """Insert callables right after the callable named ``after`` in namespace ``ns_name``."""
    namespaces = []
    for ns in program.namespaces:
        if ns.name == ns_name:
            cs = []
            for c in ns.callables:
                cs.append(c)
                if c.name == after:
                    cs.extend(new_callables)
            ns = dataclasses.replace(ns, callables=tuple(cs))
        namespaces.append(ns)
    return dataclasses.replace(program, namespaces=tuple(namespaces))


def callee_signature(table: SymbolTable, renamed: dict[str, str] | None = None) -> dict[str, list[str]]:
    """Per callable, the qualified names of the callables it references in preorder."""
    renamed = renamed or {}
    out = {}
    for q, sym in table.callables.items():
        refs = []
        for n in sym.decl.body.walk():
            if isinstance(n, (A.Call, A.Ident)):
                s = table.symbol_of(n)
                if s is not None and s.kind == "callable":
                    refs.append(renamed.get(s.qualified, s.qualified))
        out[renamed.get(q, q)] = refs
    return out


def _singular(name: str) -> str | None:
    if len(name) > 1 and name.endswith("s") and not name.endswith("ss"):
        return name[:-1]
    return None


@dataclasses.dataclass
class Extraction:
    """What extracting one statement range needs: parameters, live-out value, body."""

    rng: StmtRange
    free: list[Symbol]
    live_out: Symbol | None

    @property
    def params(self) -> list[Symbol]:
        quantum = [s for s in self.free if s.type is not None and s.type.is_quantum]
        classical = [s for s in self.free if not (s.type is not None and s.type.is_quantum)]
        return quantum + classical


def analyze_range(ctx: Context, rng: StmtRange, kind: str, order: str = "declaration") -> Extraction:
    table = ctx.table
    stmts = rng.stmts
    if not stmts:
        raise Precondition("range is empty")
    nodes = [n for s in stmts for n in s.walk()]
    if any(isinstance(n, A.Return) for n in nodes):
        raise Precondition("range contains return")
    declared = set(declared_in(stmts, table))
    free = []
    for sid in referenced_in(stmts, table):
        sym = table.symbols[sid]
        if sym.kind == "callable" or sid in declared:
            continue
        free.append(sym)
    if order == "declaration":
        free.sort(key=lambda s: s.id)
    for n in nodes:
        if isinstance(n, A.Set) and table.refs.get(id(n)) not in declared:
            raise Precondition(f"range assigns to outer mutable {n.name!r}")
    top = [table.refs[id(s)] for s in stmts if isinstance(s, (A.Let, A.Mutable))]
    used_after = set(referenced_in(rng.after, table))
    live = [table.symbols[sid] for sid in top if sid in used_after]
    if len(live) > 1:
        raise Precondition("multiple live-out values: " + ", ".join(s.name for s in live))
    live_out = live[0] if live else None
    if live_out is not None and (live_out.type is None or live_out.type.is_quantum):
        raise Precondition(f"live-out value {live_out.name!r} cannot be returned")
    if kind == "function":
        quantum = (
            any(isinstance(n, (A.Using, A.ControlledApply)) for n in nodes)
            or any(isinstance(n, A.Call) and is_operation_call(n, table) for n in nodes)
            or any(s.type is not None and s.type.is_quantum for s in free)
        )
        if quantum:
            raise Precondition("range touches qubits; a function must be classical")
    elif rng.callable.kind == "function":
        raise Precondition("an operation cannot be called from a function")
    return Extraction(rng, free, live_out)


def build_extraction(ctx: Context, ex: Extraction, kind: str, name: str,
                     param_names: dict[int, str] | None = None):
    """(new callable, replacement statement) for an analysed range."""
    param_names = param_names or {}
    params = ex.params
    mapping = {s.id: param_names[s.id] for s in params if s.id in param_names}
    body = [rename_symbols(s, ctx.table, mapping) for s in ex.rng.stmts]
    ret = A.UNIT
    if ex.live_out is not None:
        body.append(A.Return(A.Ident(ex.live_out.name)))
        ret = ex.live_out.type
    new = A.Callable(kind, name, tuple(A.Param(mapping.get(s.id, s.name), s.type) for s in params),
                     ret, A.Block(tuple(body)))
    call = A.Call(name, tuple(A.Ident(s.name) for s in params))
    if ex.live_out is None:
        stmt = A.CallStmt(call)
    elif ex.live_out.mutable:
        stmt = A.Mutable(ex.live_out.name, call)
    else:
        stmt = A.Let(ex.live_out.name, call)
    return new, stmt


def _new_callable_name(ctx: Context, ns: str, requested: str | None, base: str) -> str:
    names = {c.name for c in ctx.namespace(ns).callables}
    if requested:
        check_identifier(requested, "new name")
        if requested in names:
            raise Precondition(f"name collision: {ns} already declares {requested!r}")
        return requested
    return fresh_name(base, names | all_names(ctx.program))


def extract(ctx: Context, target: str, new_name: str | None = None, kind: str = "operation"):
    rng = ctx.range(target)
    ex = analyze_range(ctx, rng, kind)
    if kind == "function" and len(rng.stmts) == len(rng.callable.body.stmts) and rng.block is rng.callable.body:
        raise Precondition("range is the whole body of the callable")
    name = _new_callable_name(ctx, rng.namespace, new_name, f"{rng.callable.name}Part")
    new, stmt = build_extraction(ctx, ex, kind, name)
    program = edit_blocks(ctx.program, {id(rng.block): lambda ss: ss[:rng.start] + [stmt] + ss[rng.stop:]})
    program = insert_callables(program, rng.namespace, rng.callable.name, [new])
    return program, [f"extracted {rng.label()} into {kind} {name}"], {}


def extract_operation(ctx: Context, target: str, new_name: str | None = None):
    return extract(ctx, target, new_name, "operation")


def extract_function_from_operation(ctx: Context, target: str, new_name: str | None = None):
    return extract(ctx, target, new_name, "function")


# -------------------------------------------------------------------- split


def parse_partition(spec) -> list[tuple[str, str]]:
    """``"0..3:NameA,4..6:NameB"`` or a list of pairs/dicts -> [(range, name)]."""
    if isinstance(spec, str):
        items = []
        for part in spec.split(","):
            rng, colon, name = part.strip().rpartition(":")
            if not colon or not rng:
                raise Precondition(f"bad partition entry {part!r}; expected <range>:<name>")
            items.append((rng.strip(), name.strip()))
        return items
    out = []
    for item in spec:
        if isinstance(item, dict):
            out.append((str(item["range"]), str(item["name"])))
        else:
            out.append((str(item[0]), str(item[1])))
    return out


def _loop_param_names(ctx: Context, ex: Extraction) -> dict[int, str]:
    """Loop counters bounded by a plural name take the singular form as parameter name."""
    out = {}
    taken = {s.name for s in ex.params}
    for s in ex.params:
        decl = s.decl
        if s.kind != "loopVar" or not isinstance(decl.range, A.RangeExpr):
            continue
        hi = decl.range.hi
        if isinstance(hi, A.Ident):
            single = _singular(hi.name)
            if single and single not in taken:
                out[s.id] = single
                taken.add(single)
    return out


def split_operation(ctx: Context, target: str, partition, param_names: dict | None = None):
    ns, c = ctx.callable(target.partition(":")[0])
    items = parse_partition(partition)
    if not items:
        raise Precondition("partition is empty")
    try:
        ranges = [parse_range(r) for r, _ in items]
    except ValueError as e:
        raise Precondition(str(e)) from None
    body = c.body.stmts
    # "0..3" on a body that is one loop means the loop body, when read literally it cannot resolve
    if (all(len(lo) == 1 and len(hi) == 1 for lo, hi in ranges) and len(body) == 1
            and len(A.child_blocks(body[0])) == 1 and any(hi[0] >= 1 for _, hi in ranges)):
        ranges = [((0,) + lo, (0,) + hi) for lo, hi in ranges]
    resolved = [ctx.range_paths(ns, c, lo, hi) for lo, hi in ranges]
    for a, b in zip(resolved, resolved[1:]):
        if a.block is not b.block:
            raise Precondition("partition ranges must lie in one block")
        if b.start < a.stop:
            raise Precondition("partition ranges overlap or are out of order")
    names = [n for _, n in items]
    if len(set(names)) != len(names):
        raise Precondition("partition names must be distinct")
    existing = {x.name for x in ctx.namespace(ns).callables}
    for n in names:
        check_identifier(n, "new name")
        if n in existing:
            raise Precondition(f"name collision: {ns} already declares {n!r}")
    extras = dict(param_names or {})
    # Check every range against the original program before editing anything.
    analyses = [analyze_range(ctx, r, "operation") for r in resolved]
    new_callables, replacements = [], []
    for ex, name in zip(analyses, names):
        renames = _loop_param_names(ctx, ex)
        for s in ex.params:
            if s.name in extras:
                check_identifier(extras[s.name], "parameter name")
                renames[s.id] = extras[s.name]
        new, stmt = build_extraction(ctx, ex, "operation", name, renames)
        new_callables.append(new)
        replacements.append(stmt)
    block = resolved[0].block

    def edit(ss):
        for r, stmt in reversed(list(zip(resolved, replacements))):
            ss = ss[:r.start] + [stmt] + ss[r.stop:]
        return ss
    program = edit_blocks(ctx.program, {id(block): edit})
    program = insert_callables(program, ns, c.name, new_callables)
    return program, [f"split {ns}.{c.name} into {', '.join(names)}"], {}


# ----------------------------------------------------------- duplication


def _range_from(ctx: Context, ns: str, c: A.Callable, path: Path, length: int) -> StmtRange:
    ref = ctx.ref_at(c, path)
    if ref.position + length > len(ref.block.stmts):
        raise Precondition("clone length runs past the end of its block")
    last = None
    for r in iter_statements(c.body):
        if r.block is ref.block and r.position == ref.position + length - 1:
            last = r.path
    return ctx.range_paths(ns, c, path, last)


def remove_code_duplication(ctx: Context, target: str, new_name: str | None = None,
                            index: int = 0, min_len: int = 2, pair=None):
    ns, c, tail = ctx.split_target(target)
    if pair is not None:
        a_text, b_text = (pair.split(";") if isinstance(pair, str) else pair)
        ra, rb = ctx.range_in(ns, c, a_text), ctx.range_in(ns, c, b_text)
        found = [(ra.paths[0], rb.paths[0], len(ra.stmts))]
        if len(rb.stmts) != len(ra.stmts):
            raise Precondition("clone ranges differ in length")
        dups = find_duplicates(c, ctx.table, 2)
        if not any(d[0] == found[0][0] and d[1] == found[0][1] and d[2] >= found[0][2] for d in dups):
            raise Precondition("ranges are not a duplicate pair")
    else:
        found = find_duplicates(c, ctx.table, int(min_len))
        if int(index) >= len(found):
            raise Precondition(f"no duplicate pair #{index} in {c.name}")
    path_a, path_b, length = found[int(index) if pair is None else 0]
    ra, rb = _range_from(ctx, ns, c, path_a, length), _range_from(ctx, ns, c, path_b, length)
    ea = analyze_range(ctx, ra, "operation", order="reference")
    eb = analyze_range(ctx, rb, "operation", order="reference")
    sig_a = [(s.name, s.type) for s in ea.params]
    sig_b = [(s.name, s.type) for s in eb.params]
    if sig_a != sig_b:
        raise Precondition("clones have different free variables")
    if (ea.live_out is None) != (eb.live_out is None):
        raise Precondition("only one clone produces a live-out value")
    if ea.live_out is not None:
        pos_a = declared_in(ra.stmts, ctx.table).index(ea.live_out.id)
        pos_b = declared_in(rb.stmts, ctx.table).index(eb.live_out.id)
        if pos_a != pos_b or ea.live_out.type != eb.live_out.type:
            raise Precondition("clones produce different live-out values")
    name = _new_callable_name(ctx, ns, new_name, f"{c.name}Shared")
    new, stmt_a = build_extraction(ctx, ea, "operation", name)
    _, stmt_b = build_extraction(ctx, eb, "operation", name)
    edits: dict[int, object] = {}
    if ra.block is rb.block:
        edits[id(ra.block)] = lambda ss: (ss[:ra.start] + [stmt_a] + ss[ra.stop:rb.start] + [stmt_b]
                                          + ss[rb.stop:])
    else:
        edits[id(ra.block)] = lambda ss: ss[:ra.start] + [stmt_a] + ss[ra.stop:]
        edits[id(rb.block)] = lambda ss: ss[:rb.start] + [stmt_b] + ss[rb.stop:]
    program = edit_blocks(ctx.program, edits)
    program = insert_callables(program, ns, c.name, [new])
    return program, [f"replaced clones at {ra.label()} and {rb.label()} by calls to {name}"], {}


# ---------------------------------------------------------------- namespace


def extract_namespace(ctx: Context, targets, new_namespace: str):
    check_namespace_name(new_namespace)
    if ctx.program.namespace(new_namespace) is not None:
        raise Precondition(f"namespace exists: {new_namespace!r}")
    if isinstance(targets, str):
        targets = [t for t in (x.strip() for x in targets.split(",")) if t]
    if not targets:
        return ctx.program, ["no callables to move"], {}
    moved: list[tuple[str, A.Callable]] = []
    for t in targets:
        ns, c = ctx.callable(t)
        if all(c is not m for _, m in moved):
            moved.append((ns, c))
    moved_q = {f"{ns}.{c.name}" for ns, c in moved}
    renamed = {q: f"{new_namespace}.{q.rsplit('.', 1)[1]}" for q in moved_q}
    sources = []
    for ns, _ in moved:
        if ns not in sources:
            sources.append(ns)
    opens: list[str] = []
    for s in sources:
        for o in ctx.namespace(s).opens:
            if o not in opens:
                opens.append(o)
    for _, c in moved:
        for n in c.body.walk():
            sym = ctx.table.symbol_of(n) if isinstance(n, (A.Call, A.Ident)) else None
            if sym is not None and sym.kind == "callable" and sym.qualified not in moved_q:
                if sym.namespace not in opens:
                    opens.append(sym.namespace)
    new_ns = A.Namespace(new_namespace, tuple(opens), tuple(c for _, c in moved))
    namespaces = []
    for ns in ctx.program.namespaces:
        remaining = tuple(c for c in ns.callables if f"{ns.name}.{c.name}" not in moved_q)
        refers = False
        for c in remaining:
            for n in c.body.walk():
                sym = ctx.table.symbol_of(n) if isinstance(n, (A.Call, A.Ident)) else None
                if sym is not None and sym.kind == "callable" and sym.qualified in moved_q:
                    refers = True
        ns_opens = ns.opens
        if refers and new_namespace not in ns_opens:
            ns_opens = ns_opens + (new_namespace,)
        namespaces.append(dataclasses.replace(ns, callables=remaining, opens=ns_opens))
        if ns.name == sources[0]:
            namespaces.append(new_ns)
    program = dataclasses.replace(ctx.program, namespaces=tuple(namespaces))
    new_table, diags = analyze(program)
    if diags:
        raise Precondition(f"name clash after move: {diags[0].message}")
    if callee_signature(new_table) != callee_signature(ctx.table, renamed):
        raise Precondition("name clash after move: a call would bind to a different callable")
    names = ", ".join(sorted(moved_q))
    return program, [f"moved {names} to namespace {new_namespace}"], renamed
