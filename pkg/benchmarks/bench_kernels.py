"""Compare the numba and numpy statevector kernels.

    python3 benchmarks/bench_kernels.py [--qubits 4 8 12 16] [--repeat 200]

Also times the simulation_before fixture end to end under whichever backend is active
(set QRT_DISABLE_NUMBA=1 to force numpy).
"""

from __future__ import annotations

import argparse
import math
import time
from pathlib import Path

import numpy as np

from qrt.sim import kernels, run_distribution
from qrt.syntax import parse

H = 1 / math.sqrt(2)


def layer(apply_gate, state, n):
    for t in range(n):
        apply_gate(state, 0, t, H, H, H, -H)
    for t in range(1, n):
        apply_gate(state, 1 << (t - 1), t, 0.0, 1.0, 1.0, 0.0)


def time_backend(funcs, n, repeat):
    apply_gate, outcome_probs, collapse, norm_sq = funcs
    state = np.zeros(1 << n, dtype=np.complex128)
    state[0] = 1
    bits = np.arange(min(n, 4), dtype=np.int64)
    layer(apply_gate, state.copy(), n)  # warm-up (numba compiles here)
    outcome_probs(state, bits)
    start = time.perf_counter()
    for _ in range(repeat):
        layer(apply_gate, state, n)
        outcome_probs(state, bits)
    elapsed = time.perf_counter() - start
    assert abs(norm_sq(state) - 1.0) < 1e-9
    return elapsed / repeat, state


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[4, 8, 12, 16])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()

    backends = kernels.backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    print(f"{'qubits':>6}  " + "  ".join(f"{name:>12}" for name in backends) + "  speedup")
    for n in args.qubits:
        times, states = {}, {}
        for name, funcs in backends.items():
            times[name], states[name] = time_backend(funcs, n, args.repeat)
        if len(states) > 1:
            ref, *rest = states.values()
            assert all(np.allclose(ref, s, atol=1e-12) for s in rest)
        speedup = times["numpy"] / times["numba"] if "numba" in times else float("nan")
        row = "  ".join(f"{times[name] * 1e6:>10.1f}us" for name in backends)
        print(f"{n:>6}  {row}  {speedup:6.1f}x")

    fixture = Path(__file__).resolve().parent.parent / "tests" / "corpus" / "simulation_before.qs"
    program = parse(fixture.read_text(encoding="utf-8"))
    run_distribution(program)
    start = time.perf_counter()
    for _ in range(20):
        run_distribution(program)
    print(f"sim_before run_distribution: {(time.perf_counter() - start) / 20 * 1e3:.2f} ms ({kernels.BACKEND})")


if __name__ == "__main__":
    main()
