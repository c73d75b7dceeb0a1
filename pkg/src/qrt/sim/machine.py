"""Quantum register with replayable measurement branching."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..syntax.diagnostics import Diagnostic, DiagnosticError
from . import kernels
from .gates import GATE_MATRICES

PRUNE_EPS = 1e-12
RELEASE_EPS = 1e-9


class SimulationError(DiagnosticError):
    @property
    def code(self) -> str:
        return self.diagnostics[0].code


def fail(code: str, message: str) -> SimulationError:
    return SimulationError([Diagnostic(code, message)])


class Result(enum.Enum):
    Zero = 0
    One = 1

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Limits:
    max_qubits: int = 12
    max_branches: int = 4096
    max_steps: int = 1_000_000

    @classmethod
    def from_mapping(cls, data: dict | None) -> "Limits":
        if not data:
            return cls()
        keys = {"maxQubits": "max_qubits", "maxBranches": "max_branches", "maxSteps": "max_steps"}
        kwargs = {}
        for k, v in data.items():
            field = keys.get(k, k)
            if field not in ("max_qubits", "max_branches", "max_steps"):
                raise ValueError(f"unknown limit {k!r}")
            kwargs[field] = int(v)
        return cls(**kwargs)


class Qubit:
    """A live wire. ``pos`` is its allocation position; position 0 is the most significant bit."""

    __slots__ = ("pos", "measured", "released")

    def __init__(self, pos: int) -> None:
        self.pos = pos
        self.measured = False
        self.released = False

    def __repr__(self) -> str:
        return f"Qubit({self.pos})"


class Machine:
    """Statevector plus the bookkeeping for one execution path.

    ``forced`` holds the outcomes of the first measurements of the path. Past
    its end the first non-pruned outcome is taken and the remaining outcomes
    are recorded in ``alternatives`` as new forced prefixes.
    """

    def __init__(self, limits: Limits, forced: tuple = (), initial_wires: int = 0,
                 basis: int = 0, unitary_mode: bool = False) -> None:
        self.limits = limits
        self.forced = forced
        self.cursor = 0
        self.prob = 1.0
        self.pruned = 0.0
        self.alternatives: list[tuple] = []
        self.unitary_mode = unitary_mode
        self.wires: list[Qubit] = []
        self.state = np.ones(1, dtype=np.complex128)
        if initial_wires:
            self.allocate(initial_wires)
            self.state[:] = 0.0
            self.state[basis] = 1.0

    @property
    def n(self) -> int:
        return len(self.wires)

    def bit(self, q: Qubit) -> int:
        if q.released:
            raise fail("E_RUNTIME", "use of a released qubit")
        return self.n - 1 - q.pos

    # ---------------------------------------------------------- allocation

    def allocate(self, k: int) -> list[Qubit]:
        if k < 0:
            raise fail("E_RUNTIME", f"cannot allocate {k} qubits")
        if self.n + k > self.limits.max_qubits:
            raise fail("E_LIMIT", f"qubits: {self.n + k} live qubits exceed the limit of {self.limits.max_qubits}")
        qs = [Qubit(self.n + i) for i in range(k)]
        if k:
            grown = np.zeros(self.state.shape[0] << k, dtype=np.complex128)
            grown[:: 1 << k] = self.state
            self.state = grown
            self.wires.extend(qs)
        return qs

    def release(self, qs: list[Qubit]) -> None:
        k = len(qs)
        if not k:
            return
        if self.wires[-k:] != qs:
            raise fail("E_RUNTIME", "qubits released out of allocation order")
        column = 0
        for q in qs:
            b = self.bit(q)
            p1 = self.probabilities([b])[1]
            if p1 <= RELEASE_EPS:
                continue
            if q.measured and p1 >= 1.0 - RELEASE_EPS:
                column |= 1 << b
                continue
            raise fail("E_RELEASE_NONZERO", "qubit released while possibly not in the |0> state")
        kept = self.state.reshape(-1, 1 << k)[:, column].copy()
        norm = math.sqrt(kernels.norm_sq(kept))
        self.state = kept / norm
        del self.wires[-k:]
        for q in qs:
            q.released = True

    # --------------------------------------------------------------- gates

    def gate(self, name: str, controls, target: Qubit) -> None:
        operands = [*controls, target]
        if len({id(q) for q in operands}) != len(operands):
            raise fail("E_RUNTIME", f"overlapping operands for {name}")
        mask = 0
        for c in controls:
            mask |= 1 << self.bit(c)
        m = GATE_MATRICES[name]
        kernels.apply_gate(self.state, mask, self.bit(target), m[0, 0], m[0, 1], m[1, 0], m[1, 1])
        target.measured = False

    # --------------------------------------------------------- measurement

    def probabilities(self, bits: list[int]) -> np.ndarray:
        return kernels.outcome_probs(self.state, np.asarray(bits, dtype=np.int64))

    def measure(self, qs: list[Qubit]) -> int:
        """Joint computational-basis measurement; bit r of the outcome is qs[r]."""
        if self.unitary_mode:
            raise fail("E_PRECONDITION", "measurement in a callable analysed as a unitary")
        if len({id(q) for q in qs}) != len(qs):
            raise fail("E_RUNTIME", "a qubit appears twice in one measurement")
        bits = np.asarray([self.bit(q) for q in qs], dtype=np.int64)
        probs = kernels.outcome_probs(self.state, bits)
        outcome = self.choose(probs)
        p = probs[outcome]
        kernels.collapse(self.state, bits, outcome, 1.0 / math.sqrt(p))
        for q in qs:
            q.measured = True
        return outcome

    def choose(self, probs: np.ndarray) -> int:
        live = [o for o in range(len(probs)) if probs[o] >= PRUNE_EPS]
        if self.cursor < len(self.forced):
            outcome = self.forced[self.cursor]
        else:
            outcome = live[0]
            prefix = self.forced[: self.cursor]
            for o in live[1:]:
                self.alternatives.append(prefix + (o,))
            self.forced = prefix + (outcome,)
            dead = math.fsum(float(probs[o]) for o in range(len(probs)) if probs[o] < PRUNE_EPS)
            self.pruned += self.prob * dead
        self.cursor += 1
        self.prob *= float(probs[outcome])
        return outcome

    def reset(self, q: Qubit) -> None:
        if self.unitary_mode:
            raise fail("E_PRECONDITION", "Reset in a callable analysed as a unitary")
        if self.measure([q]):
            self.gate("X", (), q)
        q.measured = True
