"""Static checks for the quantum-specific rules of the language."""

from __future__ import annotations

from ..syntax import ast as A
from ..syntax.builtins import BUILTINS
from ..syntax.diagnostics import Diagnostic
from .qubits import definitely_overlap, qubit_refs
from .symbols import SymbolTable


def is_operation_call(e: A.Node, table: SymbolTable) -> bool:
    """True for gate/measure/reset/apply intrinsics and calls to user operations."""
    if isinstance(e, A.ControlledApply):
        return True
    if isinstance(e, A.Call):
        if e.callee in BUILTINS:
            return BUILTINS[e.callee].is_operation
        sym = table.symbol_of(e)
        return sym is not None and sym.decl.is_operation
    return False


def _arg_groups(args, table: SymbolTable) -> list[list]:
    groups = []
    for a in args:
        if isinstance(a, A.ArrayLit):
            groups.extend(qubit_refs(item, table) for item in a.items)
        else:
            groups.append(qubit_refs(a, table))
    return groups


def check_quantum_safety(program: A.Program, table: SymbolTable) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for ns in table.program.namespaces:
        for c in ns.callables:
            for node in c.body.walk():
                if c.kind == "function":
                    if isinstance(node, A.Using):
                        diags.append(Diagnostic("E_QUANTUM_IN_FUNCTION",
                                                f"function {c.name!r} allocates qubits", node.span))
                    elif is_operation_call(node, table):
                        what = getattr(node, "callee", None) or f"Controlled {node.gate}"
                        diags.append(Diagnostic("E_QUANTUM_IN_FUNCTION",
                                                f"function {c.name!r} calls operation {what}", node.span))
                if isinstance(node, A.ControlledApply):
                    ctl = qubit_refs(node.controls, table)
                    tgt = [r for a in node.args for r in qubit_refs(a, table)]
                    if any(definitely_overlap(x, y) for x in ctl for y in tgt):
                        diags.append(Diagnostic("E_OVERLAP_CONTROL",
                                                "control and target qubits overlap", node.span))
                    groups = _arg_groups((node.controls,), table)
                    if _duplicated(groups):
                        diags.append(Diagnostic("E_DUPLICATE_QUBIT",
                                                "the same qubit appears twice among the controls",
                                                node.span))
                elif isinstance(node, A.Call) and is_operation_call(node, table):
                    if _duplicated(_arg_groups(node.args, table)):
                        diags.append(Diagnostic("E_DUPLICATE_QUBIT",
                                                f"{node.callee} receives the same qubit twice", node.span))
    diags.sort(key=lambda d: d.span.start)
    return diags


def _duplicated(groups: list[list]) -> bool:
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            if any(definitely_overlap(x, y) for x in groups[i] for y in groups[j]):
                return True
    return False
