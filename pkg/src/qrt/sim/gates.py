"""Matrices of the single-qubit intrinsic gates."""

from __future__ import annotations

import numpy as np

_R = 1.0 / np.sqrt(2.0)

GATE_MATRICES: dict[str, np.ndarray] = {
    "H": np.array([[_R, _R], [_R, -_R]], dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "S": np.array([[1, 0], [0, 1j]], dtype=np.complex128),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=np.complex128),
}

# Multi-qubit intrinsics expressed as (number of controls, target gate).
CONTROLLED_FORMS: dict[str, tuple[int, str]] = {"CNOT": (1, "X"), "CCNOT": (2, "X")}
