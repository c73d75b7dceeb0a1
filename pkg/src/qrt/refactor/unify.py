"""Structural comparison of callables up to local renaming, recording literal differences."""

from __future__ import annotations

import dataclasses

from ..analysis.symbols import SymbolTable
from ..syntax import ast as A
from .base import literal_value

Step = tuple[str, "int | None"]
Position = tuple[Step, ...]


class Mismatch(Exception):
    pass


def canonical_ids(table: SymbolTable, qualified: str) -> dict[int, int]:
    """Symbol id -> declaration rank among the locals (parameters first) of a callable."""
    return {s.id: k for k, s in enumerate(table.locals_of(qualified))}


class Unifier:
    def __init__(self, table: SymbolTable, canon_a: dict[int, int], canon_b: dict[int, int]) -> None:
        self.table = table
        self.canon_a = canon_a
        self.canon_b = canon_b
        self.diffs: dict[Position, tuple] = {}

    def _same_ref(self, a, b) -> bool:
        sa, sb = self.table.refs.get(id(a)), self.table.refs.get(id(b))
        if sa is None or sb is None:
            return sa is None and sb is None
        if sa in self.canon_a or sb in self.canon_b:
            return self.canon_a.get(sa, -1) == self.canon_b.get(sb, -2)
        return sa == sb

    def node(self, a, b, pos: Position = ()) -> None:
        if type(a) is not type(b) and not (literal_value(a) and literal_value(b)):
            raise Mismatch(f"{type(a).__name__} vs {type(b).__name__}")
        la, lb = literal_value(a), literal_value(b)
        if la is not None and lb is not None:
            if la != lb:
                self.diffs[pos] = (la, lb)
            return
        if (la is None) != (lb is None):
            raise Mismatch("literal vs non-literal")
        names = []
        for f in dataclasses.fields(a):
            if not f.compare:
                continue
            va, vb = getattr(a, f.name), getattr(b, f.name)
            if f.name in ("name", "callee", "var") and isinstance(va, str):
                names.append((va, vb))
                continue
            self.value(va, vb, pos + ((f.name, None),))
        if names:
            if not self._same_ref(a, b):
                raise Mismatch("names refer to different symbols")
            if self.table.refs.get(id(a)) is None and names[0][0] != names[0][1]:
                raise Mismatch(f"{names[0][0]} vs {names[0][1]}")

    def value(self, va, vb, pos: Position) -> None:
        if isinstance(va, A.Node) and isinstance(vb, A.Node):
            self.node(va, vb, pos)
        elif isinstance(va, tuple) and isinstance(vb, tuple):
            if len(va) != len(vb):
                raise Mismatch("different lengths")
            field = pos[-1][0]
            for i, (x, y) in enumerate(zip(va, vb)):
                self.value(x, y, pos[:-1] + ((field, i),))
        elif va != vb:
            raise Mismatch(f"{va!r} vs {vb!r}")


def unify_callables(table: SymbolTable, a: A.Callable, b: A.Callable) -> dict[Position, tuple]:
    """Differing literal positions of two callables' bodies (raises Mismatch)."""
    qa = table.symbols[table.refs[id(a)]].qualified
    qb = table.symbols[table.refs[id(b)]].qualified
    if [p.type for p in a.params] != [p.type for p in b.params] or a.return_type != b.return_type:
        raise Mismatch("signatures differ")
    u = Unifier(table, canonical_ids(table, qa), canonical_ids(table, qb))
    u.node(a.body, b.body)
    return u.diffs


def unify_sequences(table: SymbolTable, xs: list, ys: list) -> dict[Position, tuple]:
    """Literal differences between two statement lists with identical names."""
    u = Unifier(table, {}, {})
    if len(xs) != len(ys):
        raise Mismatch("different lengths")
    for i, (x, y) in enumerate(zip(xs, ys)):
        u.node(x, y, (("stmts", i),))
    return u.diffs


def get_at(node, pos: Position):
    for field, idx in pos:
        node = getattr(node, field)
        if idx is not None:
            node = node[idx]
    return node


def replace_at(node, pos: Position, new):
    if not pos:
        return new
    (field, idx), rest = pos[0], pos[1:]
    child = getattr(node, field)
    if idx is None:
        return dataclasses.replace(node, **{field: replace_at(child, rest, new)})
    items = list(child)
    items[idx] = replace_at(items[idx], rest, new)
    return dataclasses.replace(node, **{field: tuple(items)})


def literal_positions(node, pos: Position = ()) -> list[Position]:
    """Positions of every literal inside ``node`` in preorder."""
    if literal_value(node) is not None:
        return [pos]
    out = []
    for f in dataclasses.fields(node):
        if not f.compare:
            continue
        v = getattr(node, f.name)
        if isinstance(v, A.Node):
            out.extend(literal_positions(v, pos + ((f.name, None),)))
        elif isinstance(v, tuple):
            for i, x in enumerate(v):
                if isinstance(x, A.Node):
                    out.extend(literal_positions(x, pos + ((f.name, i),)))
    return out
