"""Fixed registry of intrinsic callables available to every program."""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

from .ast import INT, QUBIT, QUBIT_ARRAY, RESULT, RESULT_ARRAY, STRING, UNIT, Type


@dataclass(frozen=True)
class Builtin:
    name: str
    kind: str  # "gate" | "measure" | "reset" | "apply" | "message" | "convert"
    params: tuple[Type, ...]
    returns: Type

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def is_operation(self) -> bool:
        return self.kind in ("gate", "measure", "reset", "apply")


# Placeholder type for a callable argument such as the gate in ApplyToEach.
GATE_REF = Type("Gate")

_GATES_1Q = ("H", "X", "Y", "Z", "S", "T")

_ENTRIES = [
    *(Builtin(g, "gate", (QUBIT,), UNIT) for g in _GATES_1Q),
    Builtin("CNOT", "gate", (QUBIT, QUBIT), UNIT),
    Builtin("CCNOT", "gate", (QUBIT, QUBIT, QUBIT), UNIT),
    Builtin("M", "measure", (QUBIT,), RESULT),
    Builtin("MultiM", "measure", (QUBIT_ARRAY,), RESULT_ARRAY),
    Builtin("Reset", "reset", (QUBIT,), UNIT),
    Builtin("ApplyToEach", "apply", (GATE_REF, QUBIT_ARRAY), UNIT),
    Builtin("Message", "message", (STRING,), UNIT),
    Builtin("ResultArrayAsInt", "convert", (RESULT_ARRAY,), INT),
]

BUILTINS: MappingProxyType = MappingProxyType({b.name: b for b in _ENTRIES})
GATES = frozenset(b.name for b in _ENTRIES if b.kind == "gate")
SINGLE_QUBIT_GATES = frozenset(_GATES_1Q)
# Gates accepted as the target of ``Controlled``.
CONTROLLABLE_GATES = SINGLE_QUBIT_GATES


def is_builtin(name: str) -> bool:
    return name in BUILTINS
