"""Branching statevector simulator used as the behaviour oracle."""

from .interpreter import Interpreter, render
from .kernels import BACKEND
from .machine import Limits, Result, SimulationError
from .oracle import (
    TraceDistribution, Verdict, check_equivalence, compare_distributions, matrix_rule_check,
    phase_fidelity, prepare, rule_unitaries, run_distribution, unitary_of,
)

__all__ = [
    "BACKEND", "Interpreter", "Limits", "Result", "SimulationError", "TraceDistribution",
    "Verdict", "check_equivalence", "compare_distributions", "matrix_rule_check",
    "phase_fidelity", "prepare", "render", "rule_unitaries", "run_distribution", "unitary_of",
]
