"""Symbol-aware tree rewriting used by the analyses and the refactorings.

Both helpers consult ``table.refs`` on the *original* nodes, so they must be
given subtrees of ``table.program``.
"""

from __future__ import annotations

import dataclasses

from ..syntax import ast as A
from .symbols import SymbolTable

_NAME_FIELD = {
    A.Ident: "name", A.Call: "callee", A.Let: "name", A.Mutable: "name", A.Set: "name",
    A.For: "var", A.Using: "name", A.Param: "name", A.Callable: "name",
}


def rename_symbols(node: A.Node, table: SymbolTable, mapping: dict[int, str]) -> A.Node:
    """Rename every declaration and reference of the symbols in ``mapping``."""
    rebuilt = node.map_children(lambda c: rename_symbols(c, table, mapping))
    sid = table.refs.get(id(node))
    if sid is not None and sid in mapping:
        field = _NAME_FIELD.get(type(node))
        if field is not None:
            return dataclasses.replace(rebuilt, **{field: mapping[sid]})
    return rebuilt


def substitute_symbols(node: A.Node, table: SymbolTable, mapping: dict[int, A.Node]) -> A.Node:
    """Replace reads of the symbols in ``mapping`` with the given expressions."""
    if isinstance(node, A.Ident):
        sid = table.refs.get(id(node))
        if sid is not None and sid in mapping:
            return mapping[sid]
        return dataclasses.replace(node)
    return node.map_children(lambda c: substitute_symbols(c, table, mapping))


def declared_in(nodes, table: SymbolTable) -> list[int]:
    """Symbol ids declared anywhere inside ``nodes`` (preorder)."""
    out: list[int] = []
    for n in nodes:
        for sub in n.walk():
            if isinstance(sub, (A.Let, A.Mutable, A.For, A.Using)):
                sid = table.refs.get(id(sub))
                if sid is not None:
                    out.append(sid)
    return out


def referenced_in(nodes, table: SymbolTable) -> list[int]:
    """Symbol ids read or written inside ``nodes`` in first-reference order."""
    seen: dict[int, None] = {}
    for n in nodes:
        for sub in n.walk():
            if isinstance(sub, (A.Ident, A.Set, A.Call)):
                sid = table.refs.get(id(sub))
                if sid is not None:
                    seen.setdefault(sid, None)
    return list(seen)


def names_in(nodes) -> set[str]:
    """Every identifier spelled anywhere inside ``nodes``."""
    out: set[str] = set()
    for n in nodes:
        for sub in n.walk():
            field = _NAME_FIELD.get(type(sub))
            if field is not None:
                out.add(getattr(sub, field))
    return out
