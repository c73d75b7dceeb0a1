"""The closed table of gate cancellation, strength-reduction and substitution rules."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class GateApp:
    """One gate application on abstract wires; a controlled gate lists controls first."""

    gate: str
    wires: tuple[int, ...]
    controlled: bool = False

    def __str__(self) -> str:
        names = [f"q{w}" for w in self.wires]
        if self.controlled:
            return f"Controlled {self.gate}([{', '.join(names[:-1])}], {names[-1]})"
        return f"{self.gate}({', '.join(names)})"


@dataclass(frozen=True)
class GateRule:
    name: str
    kind: str  # "merge" (adjacent pair reduction) | "substitute"
    lhs: tuple[GateApp, ...]
    rhs: tuple[GateApp, ...]

    @property
    def arity(self) -> int:
        return 1 + max(w for g in (*self.lhs, *self.rhs) for w in g.wires)

    def __str__(self) -> str:
        lhs = "; ".join(map(str, self.lhs))
        rhs = "; ".join(map(str, self.rhs)) or "(nothing)"
        return f"{self.name}: {lhs} => {rhs}"


def _g(gate: str, *wires: int, controlled: bool = False) -> GateApp:
    return GateApp(gate, tuple(wires), controlled)


def _pair(gate: str, result: tuple[GateApp, ...] = ()) -> GateRule:
    wires = (0, 1) if gate == "CNOT" else (0,)
    name = f"{gate}{gate}->" + ("".join(g.gate for g in result) or "I")
    return GateRule(name, "merge", (_g(gate, *wires), _g(gate, *wires)), result)


MERGE_RULES: tuple[GateRule, ...] = (
    _pair("H"), _pair("X"), _pair("Y"), _pair("Z"),
    _pair("S", (_g("Z", 0),)),
    _pair("T", (_g("S", 0),)),
    _pair("CNOT"),
)

_CX = _g("X", 0, 1, controlled=True)
SUBSTITUTION_RULES: tuple[GateRule, ...] = (
    GateRule("Z->HXH", "substitute", (_g("Z", 0),), (_g("H", 0), _g("X", 0), _g("H", 0))),
    GateRule("HXH->Z", "substitute", (_g("H", 0), _g("X", 0), _g("H", 0)), (_g("Z", 0),)),
    GateRule("X->HZH", "substitute", (_g("X", 0),), (_g("H", 0), _g("Z", 0), _g("H", 0))),
    GateRule("HZH->X", "substitute", (_g("H", 0), _g("Z", 0), _g("H", 0)), (_g("X", 0),)),
    GateRule("CNOT->CX", "substitute", (_g("CNOT", 0, 1),), (_CX,)),
    GateRule("CX->CNOT", "substitute", (_CX,), (_g("CNOT", 0, 1),)),
)

GATE_RULES: tuple[GateRule, ...] = MERGE_RULES + SUBSTITUTION_RULES
RULES_BY_NAME = {r.name: r for r in GATE_RULES}

# (gate, gate) -> replacement gate name or None for cancellation
PAIR_REDUCTIONS: dict[str, str | None] = {
    r.lhs[0].gate: (r.rhs[0].gate if r.rhs else None) for r in MERGE_RULES
}


def verify_rules(rules=GATE_RULES) -> list[str]:
    """Names of rules whose sides differ as unitaries (empty when the table is sound)."""
    from ..sim import matrix_rule_check

    return [r.name for r in rules if not matrix_rule_check(r)]
