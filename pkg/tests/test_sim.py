from __future__ import annotations

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrt.sim import (
    BACKEND, SimulationError, check_equivalence, matrix_rule_check, phase_fidelity, run_distribution,
    unitary_of,
)
from qrt.sim import kernels
from qrt.sim.gates import GATE_MATRICES
from qrt.refactor.gaterules import GATE_RULES, GateApp, GateRule

from conftest import corpus_files, load


def main(body: str, extra: str = "") -> str:
    return f"namespace T {{ {extra} operation Main() : Unit {{ {body} }} }}"


def op(body: str, params: str) -> str:
    return f"namespace T {{ operation U({params}) : Unit {{ {body} }} }}"


def error_code(src, **kw) -> str:
    with pytest.raises(SimulationError) as info:
        run_distribution(src, **kw)
    return info.value.code


# ------------------------------------------------------------ distributions


def test_bell_correlation(hello):
    d = run_distribution(hello)
    assert len(d) == 2
    for trace, p in d.items():
        assert abs(p - 0.5) <= 1e-9
        assert trace[1].split(": ")[1] == trace[2].split(": ")[1]
    assert d.pruned == 0.0


def test_message_only():
    d = run_distribution(main('Message("hi");'))
    assert d.to_list() == [{"trace": ["hi"], "p": 1.0}]


def test_unmeasured_release_is_an_error():
    assert error_code(main("using (q = Qubit()) { H(q); }")) == "E_RELEASE_NONZERO"


def test_measured_release_is_allowed():
    d = run_distribution(main('using (q = Qubit()) { H(q); let r = M(q); Message($"{r}"); }'))
    assert sorted(t for t, _ in d.items()) == [("One",), ("Zero",)]


def test_simulation_is_deterministic(sim_before):
    d = run_distribution(sim_before)
    (trace, p), = d.items()
    assert trace == tuple(f"Iteration {i}: Measurement result = 0" for i in range(1, 6))
    assert abs(p - 1.0) <= 1e-9


@pytest.mark.parametrize("body,code", [
    ("using (qs = Qubit[2]) { H(qs[2]); }", "E_RUNTIME"),
    ("using (qs = Qubit[2]) { Controlled X([qs[0]], qs[0]); }", "E_RUNTIME"),
    ("let x = 1 / 0;", "E_RUNTIME"),
    ("using (qs = Qubit[13]) { }", "E_LIMIT"),
])
def test_runtime_errors(body, code):
    assert error_code(main(body)) == code


def test_branch_and_step_limits():
    src = main('using (qs = Qubit[4]) { ApplyToEach(H, qs); let rs = MultiM(qs); Message($"{rs}"); }')
    assert error_code(src, limits={"maxBranches": 8}) == "E_LIMIT"
    loop = main("mutable x = 0; for (i in 1..100000) { set x = x + 1; }")
    assert error_code(loop, limits={"maxSteps": 1000}) == "E_LIMIT"


def test_integer_semantics():
    d = run_distribution(main('Message($"{-7 / 2} {-7 % 2} {7 % -2} {ResultArrayAsInt([One, Zero, One, One])}");'))
    assert d.items()[0][0] == ("-3 -1 1 13",)


def test_rendering():
    d = run_distribution(main('Message($"{1.5} {2.0} {true} {[1, 2]} {One} {1..3}");'))
    assert d.items()[0][0] == ("1.5 2.0 True [1, 2] One 1..3",)


def test_json_is_sorted():
    d = run_distribution(main('using (q = Qubit()) { H(q); let r = M(q); Message($"{r}"); }'))
    data = json.loads(d.to_json())
    assert [x["trace"] for x in data] == [["One"], ["Zero"]]


def test_determinism(hello):
    assert run_distribution(hello).to_json() == run_distribution(hello).to_json()


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_corpus_distributions_are_complete(path):
    d = run_distribution(load(path.name))
    assert abs(d.total() - 1.0) <= 1e-9
    assert d.pruned <= 1e-9


# ------------------------------------------------------------------ unitaries


def test_unitary_h():
    u = unitary_of(op("H(q);", "q : Qubit"), "T.U")
    assert np.allclose(u, np.array([[1, 1], [1, -1]]) / math.sqrt(2), atol=1e-12)


def test_unitary_hh_is_identity():
    u = unitary_of(op("H(q); H(q);", "q : Qubit"), "T.U")
    assert np.abs(u - np.eye(2)).max() <= 1e-12


def test_unitary_cnot():
    u = unitary_of(op("CNOT(a, b);", "a : Qubit, b : Qubit"), "T.U", n=2)
    expected = np.eye(4)[:, [0, 1, 3, 2]]
    assert np.array_equal(u.real, expected) and not u.imag.any()


def test_unitary_rejects_measurement():
    with pytest.raises(SimulationError) as info:
        unitary_of(op("let r = M(q);", "q : Qubit"), "T.U")
    assert info.value.code == "E_PRECONDITION"


def test_gate_matrices_are_unitary():
    for name, m in GATE_MATRICES.items():
        assert np.abs(m.conj().T @ m - np.eye(2)).max() <= 1e-12, name


def test_phase_fidelity_ignores_global_phase():
    u = unitary_of(op("Z(q);", "q : Qubit"), "T.U")
    assert phase_fidelity(u, np.exp(0.7j) * u) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------- equivalence


def test_simulation_before_after_equivalent(sim_before, sim_after):
    assert check_equivalence(sim_before, sim_after).kind == "Equivalent"


def test_reflexive(hello):
    assert check_equivalence(hello, hello).equivalent


def test_x_mutation_witness():
    a = main('using (q = Qubit()) { X(q); let r = M(q); Message($"{r}"); }')
    b = main('using (q = Qubit()) { let r = M(q); Message($"{r}"); }')
    v = check_equivalence(a, b)
    assert v.kind == "Inequivalent"
    assert v.witness in (("One",), ("Zero",))
    assert {v.p_a, v.p_b} == {0.0, 1.0}


def test_limit_breach_is_inconclusive():
    src = main("using (qs = Qubit[6]) { }")
    v = check_equivalence(src, src, limits={"maxQubits": 4})
    assert v.kind == "Inconclusive"


def test_qubit_parameter_entries_compare_unitaries():
    a = "namespace T { operation Main(q : Qubit) : Unit { H(q); X(q); H(q); } }"
    b = "namespace T { operation Main(q : Qubit) : Unit { Z(q); } }"
    c = "namespace T { operation Main(q : Qubit) : Unit { X(q); } }"
    assert check_equivalence(a, b, entry="T.Main").equivalent
    assert check_equivalence(a, c, entry="T.Main").kind == "Inequivalent"


# ----------------------------------------------------------------- gate rules


def test_all_rules_pass_matrix_check():
    assert all(matrix_rule_check(r) for r in GATE_RULES)


def test_tt_is_s():
    rule = next(r for r in GATE_RULES if r.name == "TT->S")
    assert matrix_rule_check(rule)


def test_corrupted_rule_fails():
    bad = GateRule("HX->I", "merge", (GateApp("H", (0,)), GateApp("X", (0,))), ())
    assert not matrix_rule_check(bad)


# -------------------------------------------------------------------- kernels


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31), st.data())
def test_backends_agree(n, seed, data):
    rng = np.random.default_rng(seed)
    state = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    state /= np.linalg.norm(state)
    target = data.draw(st.integers(0, n - 1))
    ctrl = data.draw(st.integers(0, (1 << n) - 1)) & ~(1 << target)
    m = GATE_MATRICES[data.draw(st.sampled_from(sorted(GATE_MATRICES)))]
    bits = np.array(sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=1))), dtype=np.int64)
    results = {}
    for name, (apply_gate, probs, collapse, norm_sq) in kernels.backends().items():
        s = state.copy()
        apply_gate(s, ctrl, target, m[0, 0], m[0, 1], m[1, 0], m[1, 1])
        p = probs(s, bits)
        c = s.copy()
        collapse(c, bits, int(np.argmax(p)), 1.0 / math.sqrt(p.max()))
        results[name] = (s, p, c, norm_sq(c))
    ref = results["numpy"]
    assert abs(ref[3] - 1.0) <= 1e-9
    for other in results.values():
        for x, y in zip(ref, other):
            assert np.allclose(x, y, atol=1e-12)


def test_backend_flag_selects_numpy():
    code = "from qrt.sim import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, QRT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    assert BACKEND in ("numba", "numpy")


# --------------------------------------------------- brute-force path oracle

_GATES_1 = ["H", "X", "Y", "Z", "S", "T"]


@st.composite
def small_programs(draw):
    """Straight-line programs on 3 qubits with at most 2 measurements."""
    ops = []
    measured = 0
    for _ in range(draw(st.integers(1, 8))):
        kind = draw(st.sampled_from(["g1", "g1", "cnot", "ccnot", "m"]))
        if kind == "m" and measured < 2:
            ops.append(("M", draw(st.integers(0, 2))))
            measured += 1
        elif kind == "cnot":
            a, b = draw(st.permutations([0, 1, 2]))[:2]
            ops.append(("CNOT", a, b))
        elif kind == "ccnot":
            ops.append(("CCNOT", *draw(st.permutations([0, 1, 2]))))
        else:
            ops.append((draw(st.sampled_from(_GATES_1)), draw(st.integers(0, 2))))
    return ops


def _source(ops) -> str:
    lines = []
    for k, o in enumerate(ops):
        if o[0] == "M":
            lines.append(f"let r{k} = M(qs[{o[1]}]); Message($\"m{k}={{r{k}}}\");")
        else:
            lines.append(f"{o[0]}({', '.join(f'qs[{w}]' for w in o[1:])});")
    body = " ".join(lines) + " Reset(qs[0]); Reset(qs[1]); Reset(qs[2]);"
    return main(f"using (qs = Qubit[3]) {{ {body} }}")


def _full(op, n=3):
    """Dense matrix of one gate; wire 0 is the most significant bit."""
    dim = 1 << n
    u = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        bits = [(j >> (n - 1 - w)) & 1 for w in range(n)]
        name, wires = op[0], op[1:]
        if name in ("CNOT", "CCNOT"):
            *ctrl, t = wires
            out = list(bits)
            if all(bits[c] for c in ctrl):
                out[t] ^= 1
            u[int("".join(map(str, out)), 2), j] = 1
        else:
            g = GATE_MATRICES[name]
            (w,) = wires
            for v in (0, 1):
                out = list(bits)
                out[w] = v
                u[int("".join(map(str, out)), 2), j] += g[v, bits[w]]
    return u


def _brute(ops) -> dict:
    dist: dict = {}

    def walk(k, state, trace, p):
        if p < 1e-12:
            return
        if k == len(ops):
            dist[tuple(trace)] = dist.get(tuple(trace), 0.0) + p
            return
        o = ops[k]
        if o[0] != "M":
            walk(k + 1, _full(o) @ state, trace, p)
            return
        w = o[1]
        for v, label in ((0, "Zero"), (1, "One")):
            mask = np.array([((i >> (2 - w)) & 1) == v for i in range(8)])
            branch = np.where(mask, state, 0)
            q = float(np.vdot(branch, branch).real)
            if q >= 1e-12:
                walk(k + 1, branch / math.sqrt(q), trace + [f"m{k}={label}"], p * q)

    start = np.zeros(8, dtype=complex)
    start[0] = 1
    walk(0, start, [], 1.0)
    return dist


@settings(max_examples=120, deadline=None)
@given(small_programs())
def test_matches_brute_force_enumerator(ops):
    got = run_distribution(_source(ops))
    want = _brute(ops)
    assert set(got.probs) == set(want)
    for t, p in want.items():
        assert abs(got.probs[t] - p) <= 1e-9
