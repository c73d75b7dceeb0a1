"""Detection of unused variables, parameters and callables."""

from __future__ import annotations

from ..syntax import ast as A
from .symbols import Symbol, SymbolTable

ENTRY_NAME = "Main"


def entry_points(program: A.Program) -> set[tuple[str, str]]:
    """Callables treated as program entry points.

    ``Main`` when any namespace defines it; otherwise every parameterless
    operation (a program without ``Main`` is run through one of those).
    """
    mains = {(ns.name, c.name) for ns, c in program.callables() if c.name == ENTRY_NAME}
    if mains:
        return mains
    return {(ns.name, c.name) for ns, c in program.callables() if c.is_operation and not c.params}


def find_unused(program: A.Program, table: SymbolTable, pdg=None) -> list[Symbol]:
    """Variables, parameters, qubit bindings and callables that are never read.

    Loop variables are not reported: a counted loop needs its counter even
    when the body ignores it.
    """
    entries = entry_points(table.program)
    out = []
    for sym in table.symbols:
        if sym.kind == "loopVar" or table.use_count(sym):
            continue
        if sym.kind == "callable" and (sym.namespace, sym.name) in entries:
            continue
        out.append(sym)
    return out
