"""Statevector kernels with a numba path and a pure-numpy fallback.

Set ``QRT_DISABLE_NUMBA=1`` to force the numpy implementations. Both paths
share one contract: ``state`` is a complex128 vector of length ``2**n``,
modified in place; bit ``b`` of an index is the value of the wire stored at
bit position ``b``.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("QRT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:  # pragma: no cover - exercised implicitly by the environment
    if _DISABLED:
        raise ImportError("numba disabled by QRT_DISABLE_NUMBA")
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


# --------------------------------------------------------------------- numpy

_INDEX_CACHE: dict[int, np.ndarray] = {}


def _indices(size: int) -> np.ndarray:
    idx = _INDEX_CACHE.get(size)
    if idx is None:
        idx = np.arange(size, dtype=np.int64)
        _INDEX_CACHE[size] = idx
    return idx


def np_apply_gate(state, ctrl_mask, target_bit, m00, m01, m10, m11):
    idx = _indices(state.shape[0])
    tmask = 1 << target_bit
    sel = idx[((idx & tmask) == 0) & ((idx & ctrl_mask) == ctrl_mask)]
    i1 = sel | tmask
    a0 = state[sel]
    a1 = state[i1]
    state[sel] = m00 * a0 + m01 * a1
    state[i1] = m10 * a0 + m11 * a1


def np_outcome_probs(state, bits):
    idx = _indices(state.shape[0])
    outcome = np.zeros(state.shape[0], dtype=np.int64)
    for r in range(bits.shape[0]):
        outcome |= ((idx >> bits[r]) & 1) << r
    weights = state.real ** 2 + state.imag ** 2
    return np.bincount(outcome, weights=weights, minlength=1 << bits.shape[0]).astype(np.float64)


def np_collapse(state, bits, outcome, scale):
    idx = _indices(state.shape[0])
    keep = np.ones(state.shape[0], dtype=bool)
    for r in range(bits.shape[0]):
        keep &= ((idx >> bits[r]) & 1) == ((outcome >> r) & 1)
    state[~keep] = 0.0
    state[keep] *= scale


def np_norm_sq(state):
    return float(np.vdot(state, state).real)


# --------------------------------------------------------------------- numba


def _nb_apply_gate(state, ctrl_mask, target_bit, m00, m01, m10, m11):
    tmask = 1 << target_bit
    for i in range(state.shape[0]):
        if (i & tmask) == 0 and (i & ctrl_mask) == ctrl_mask:
            j = i | tmask
            a0 = state[i]
            a1 = state[j]
            state[i] = m00 * a0 + m01 * a1
            state[j] = m10 * a0 + m11 * a1


def _nb_outcome_probs(state, bits):
    k = bits.shape[0]
    out = np.zeros(1 << k, dtype=np.float64)
    for i in range(state.shape[0]):
        o = 0
        for r in range(k):
            o |= ((i >> bits[r]) & 1) << r
        a = state[i]
        out[o] += a.real * a.real + a.imag * a.imag
    return out


def _nb_collapse(state, bits, outcome, scale):
    k = bits.shape[0]
    for i in range(state.shape[0]):
        match = True
        for r in range(k):
            if ((i >> bits[r]) & 1) != ((outcome >> r) & 1):
                match = False
                break
        if match:
            state[i] *= scale
        else:
            state[i] = 0.0


def _nb_norm_sq(state):
    total = 0.0
    for i in range(state.shape[0]):
        a = state[i]
        total += a.real * a.real + a.imag * a.imag
    return total


if njit is not None:
    nb_apply_gate = njit(cache=True)(_nb_apply_gate)
    nb_outcome_probs = njit(cache=True)(_nb_outcome_probs)
    nb_collapse = njit(cache=True)(_nb_collapse)
    nb_norm_sq = njit(cache=True)(_nb_norm_sq)
    BACKEND = "numba"
    apply_gate, outcome_probs, collapse, norm_sq = nb_apply_gate, nb_outcome_probs, nb_collapse, nb_norm_sq
else:  # pragma: no cover
    nb_apply_gate = nb_outcome_probs = nb_collapse = nb_norm_sq = None
    BACKEND = "numpy"
    apply_gate, outcome_probs, collapse, norm_sq = np_apply_gate, np_outcome_probs, np_collapse, np_norm_sq


def backends() -> dict[str, tuple]:
    """Available kernel sets keyed by name, for cross-checking and benchmarks."""
    out = {"numpy": (np_apply_gate, np_outcome_probs, np_collapse, np_norm_sq)}
    if nb_apply_gate is not None:
        out["numba"] = (nb_apply_gate, nb_outcome_probs, nb_collapse, nb_norm_sq)
    return out
