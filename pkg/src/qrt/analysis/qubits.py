"""Syntactic qubit references and the aliasing rule used by every analysis.

Two references conflict iff they name the same binding and either one covers
the whole array (or a slice), or both index it at the same constant position.
Non-constant indices conservatively conflict with everything on the binding.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..syntax import ast as A
from .symbols import SymbolTable


@dataclass(frozen=True)
class QubitRef:
    binding: int  # symbol id
    lo: int | None = None  # inclusive constant bounds; None = unknown / whole
    hi: int | None = None
    whole: bool = False

    @property
    def constant(self) -> bool:
        return not self.whole and self.lo is not None


def _const(e) -> int | None:
    if isinstance(e, A.IntLit):
        return e.value
    if isinstance(e, A.Unary) and e.op == "-" and isinstance(e.operand, A.IntLit):
        return -e.operand.value
    return None


def qubit_refs(expr, table: SymbolTable) -> list[QubitRef]:
    """All qubit references appearing anywhere inside ``expr``."""
    out: list[QubitRef] = []
    _collect(expr, table, out)
    return out


def _binding(e, table: SymbolTable) -> int | None:
    if isinstance(e, A.Ident):
        sym = table.symbol_of(e)
        if sym is not None and sym.type is not None and sym.type.is_quantum:
            return sym.id
    return None


def _collect(e, table: SymbolTable, out: list[QubitRef]) -> None:
    if isinstance(e, A.Ident):
        b = _binding(e, table)
        if b is not None:
            out.append(QubitRef(b, whole=True))
        return
    if isinstance(e, A.Index):
        b = _binding(e.base, table)
        if b is not None:
            k = _const(e.index)
            out.append(QubitRef(b, k, k, whole=False) if k is not None else QubitRef(b))
            _collect(e.index, table, out)
            return
    if isinstance(e, A.Slice):
        b = _binding(e.base, table)
        if b is not None:
            lo, hi = _const(e.range.lo), _const(e.range.hi)
            if lo is not None and hi is not None:
                out.append(QubitRef(b, lo, hi))
            else:
                out.append(QubitRef(b))
            _collect(e.range, table, out)
            return
    if isinstance(e, A.InterpString):
        for p in e.parts:
            if not isinstance(p, str):
                _collect(p, table, out)
        return
    for child in e.children():
        _collect(child, table, out)


def conflicts(a: QubitRef, b: QubitRef) -> bool:
    if a.binding != b.binding:
        return False
    if a.whole or b.whole or a.lo is None or b.lo is None:
        return True
    return a.lo <= b.hi and b.lo <= a.hi


def definitely_overlap(a: QubitRef, b: QubitRef) -> bool:
    """Overlap that holds for every value of the non-constant parts."""
    if a.binding != b.binding:
        return False
    if a.whole or b.whole:
        return True
    if a.lo is None or b.lo is None:
        return False
    return a.lo <= b.hi and b.lo <= a.hi and (a.hi >= a.lo and b.hi >= b.lo)


def any_conflict(xs, ys) -> bool:
    return any(conflicts(x, y) for x in xs for y in ys)
