"""Trace distributions, unitaries and equivalence verdicts."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..analysis.symbols import SymbolTable, analyze
from ..analysis.unused import entry_points
from ..syntax import ast as A
from ..syntax.diagnostics import DiagnosticError
from ..syntax.parser import parse
from .interpreter import Interpreter
from .machine import Limits, Machine, SimulationError, fail

DIST_TOL = 1e-9
MATRIX_TOL = 1e-12
MAX_UNITARY_WIRES = 6
DEFAULT_ARRAY_SIZE = 2

Trace = tuple[str, ...]


@dataclass
class TraceDistribution:
    probs: dict[Trace, float]
    pruned: float = 0.0

    def total(self) -> float:
        return math.fsum(self.probs.values())

    def items(self):
        return sorted(self.probs.items())

    def get(self, trace) -> float:
        return self.probs.get(tuple(trace), 0.0)

    def to_list(self) -> list[dict]:
        return [{"trace": list(t), "p": p} for t, p in self.items()]

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class Verdict:
    kind: str  # "Equivalent" | "Inequivalent" | "Inconclusive"
    witness: Trace | None = None
    p_a: float = 0.0
    p_b: float = 0.0
    reason: str = ""
    entry: str = ""

    @property
    def equivalent(self) -> bool:
        return self.kind == "Equivalent"

    def to_dict(self) -> dict:
        d: dict = {"verdict": self.kind, "entry": self.entry}
        if self.kind == "Inequivalent":
            d.update(witness=list(self.witness or ()), pA=self.p_a, pB=self.p_b)
        if self.reason:
            d["reason"] = self.reason
        return d

    def describe(self) -> str:
        if self.kind == "Inequivalent":
            return (f"Inequivalent at {self.entry}: trace {list(self.witness or ())} "
                    f"has probability {self.p_a:.12g} before and {self.p_b:.12g} after")
        if self.kind == "Inconclusive":
            return f"Inconclusive at {self.entry}: {self.reason}"
        return "Equivalent"


EQUIVALENT = Verdict("Equivalent")


# ------------------------------------------------------------------ helpers


def prepare(ast) -> SymbolTable:
    """Resolve a program given as source text, a Program, or an existing table."""
    if isinstance(ast, SymbolTable):
        return ast
    if isinstance(ast, (str, bytes)):
        ast = parse(ast)
    table, diags = analyze(ast)
    if diags:
        raise DiagnosticError(diags)
    return table


def _find_entry(table: SymbolTable, entry: str | None) -> A.Callable:
    if entry is None:
        entries = sorted(entry_points(table.program))
        if len(entries) != 1:
            raise fail("E_PRECONDITION", f"cannot choose an entry point among {len(entries)} candidates")
        entry = ".".join(entries[0])
    try:
        sym = table.lookup(entry)
    except KeyError:
        sym = None
    if sym is None or sym.kind != "callable":
        raise fail("E_PRECONDITION", f"entry {entry!r} not found")
    return sym.decl


def _classical_args(c: A.Callable, args: dict | None) -> list:
    args = dict(args or {})
    out = []
    for p in c.params:
        if p.type.is_quantum:
            raise fail("E_PRECONDITION", f"entry parameter {p.name!r} is quantum")
        if p.name not in args:
            raise fail("E_PRECONDITION", f"no value supplied for entry parameter {p.name!r}")
        out.append(args.pop(p.name))
    if args:
        raise fail("E_PRECONDITION", f"unknown entry arguments {sorted(args)}")
    return out


def _wire_counts(c: A.Callable, sizes: dict | None) -> list[int]:
    sizes = sizes or {}
    counts = []
    for p in c.params:
        if p.type == A.QUBIT:
            counts.append(1)
        elif p.type == A.QUBIT_ARRAY:
            counts.append(int(sizes.get(p.name, DEFAULT_ARRAY_SIZE)))
        else:
            raise fail("E_PRECONDITION", f"parameter {p.name!r} is not a qubit")
    return counts


def _bind_wires(machine: Machine, c: A.Callable, counts: list[int]) -> list:
    args, pos = [], 0
    for p, k in zip(c.params, counts):
        wires = machine.wires[pos: pos + k]
        args.append(wires[0] if p.type == A.QUBIT else tuple(wires))
        pos += k
    return args


def _explore(table: SymbolTable, c: A.Callable, limits: Limits, make_args,
             initial_wires: int = 0, basis: int = 0, capture_errors: bool = False,
             observe_wires: bool = False) -> TraceDistribution:
    """Depth-first enumeration of measurement outcomes by replaying forced prefixes."""
    stack: list[tuple] = [()]
    leaves: list[tuple[Trace, float]] = []
    pruned: list[float] = []
    while stack:
        forced = stack.pop()
        m = Machine(limits, forced, initial_wires, basis)
        it = Interpreter(table, m, limits.max_steps)
        try:
            it.call(c, make_args(m))
            if observe_wires and initial_wires:
                o = m.measure(list(reversed(m.wires[:initial_wires])))
                it.trace.append(f"<out {o:0{initial_wires}b}>")
        except SimulationError as e:
            if not capture_errors or e.code == "E_LIMIT":
                raise
            it.trace.append(f"<error {e.code}>")
        leaves.append((tuple(it.trace), m.prob))
        pruned.append(m.pruned)
        stack.extend(reversed(m.alternatives))
        if len(leaves) + len(stack) > limits.max_branches:
            raise fail("E_LIMIT", f"branches: more than {limits.max_branches} execution paths")
    leaves.sort(key=lambda t: t[0])
    probs: dict[Trace, float] = {}
    i = 0
    while i < len(leaves):
        j = i
        while j < len(leaves) and leaves[j][0] == leaves[i][0]:
            j += 1
        probs[leaves[i][0]] = math.fsum(p for _, p in leaves[i:j])
        i = j
    return TraceDistribution(probs, math.fsum(pruned))


# ------------------------------------------------------------- public API


def run_distribution(ast, entry: str | None = None, limits: Limits | dict | None = None,
                     args: dict | None = None) -> TraceDistribution:
    """Exact distribution over Message traces of a parameterless (or Int-argument) entry."""
    limits = limits if isinstance(limits, Limits) else Limits.from_mapping(limits)
    table = prepare(ast)
    c = _find_entry(table, entry)
    argv = _classical_args(c, args)
    return _explore(table, c, limits, lambda m: list(argv))


def unitary_of(ast, entry: str, n: int | None = None, sizes: dict | None = None,
               limits: Limits | dict | None = None) -> np.ndarray:
    """Matrix of a measurement-free callable whose parameters are all qubits.

    Column j is the output state for basis input j; the first parameter wire
    is the most significant bit.
    """
    limits = limits if isinstance(limits, Limits) else Limits.from_mapping(limits)
    table = prepare(ast)
    c = _find_entry(table, entry)
    counts = _wire_counts(c, sizes)
    total = sum(counts)
    if n is not None and n != total:
        raise fail("E_PRECONDITION", f"{c.name} acts on {total} wires, not {n}")
    if total > MAX_UNITARY_WIRES:
        raise fail("E_LIMIT", f"qubits: {total} wires exceed the unitary limit of {MAX_UNITARY_WIRES}")
    dim = 1 << total
    u = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(dim):
        m = Machine(limits, (), total, j, unitary_mode=True)
        Interpreter(table, m, limits.max_steps).call(c, _bind_wires(m, c, counts))
        u[:, j] = m.state
    return u


def phase_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|tr(A^dagger B)| / dim: equals 1 exactly when A and B agree up to global phase."""
    return float(abs(np.trace(a.conj().T @ b)) / a.shape[0])


def _unitary_witness(a: np.ndarray, b: np.ndarray, n: int) -> tuple[Trace, float, float]:
    overlap = np.trace(a.conj().T @ b)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    diff = np.abs(b - phase * a)
    k, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
    label = f"<basis |{j:0{n}b}> -> |{k:0{n}b}>>"
    return (label,), float(abs(a[k, j]) ** 2), float(abs(b[k, j]) ** 2)


def compare_distributions(da: TraceDistribution, db: TraceDistribution,
                          tol: float = DIST_TOL, entry: str = "") -> Verdict:
    for trace in sorted(set(da.probs) | set(db.probs)):
        pa, pb = da.probs.get(trace), db.probs.get(trace)
        if pa is None or pb is None or abs(pa - pb) > tol:
            return Verdict("Inequivalent", trace, pa or 0.0, pb or 0.0, entry=entry)
    return Verdict("Equivalent", entry=entry)


def _uses_nonunitary(table: SymbolTable, c: A.Callable, seen=None) -> bool:
    seen = seen if seen is not None else set()
    if id(c) in seen:
        return False
    seen.add(id(c))
    for node in c.body.walk():
        if isinstance(node, A.Call):
            if node.callee in ("M", "MultiM", "Reset", "Message"):
                return True
            sid = table.refs.get(id(node))
            if sid is not None and _uses_nonunitary(table, table.symbols[sid].decl, seen):
                return True
        elif isinstance(node, A.Ident):
            sym = table.symbol_of(node)
            if sym is not None and sym.kind == "callable" and _uses_nonunitary(table, sym.decl, seen):
                return True
    return False


def _check_entry(ta: SymbolTable, tb: SymbolTable, name_a: str, name_b: str, limits: Limits,
                 args: dict | None, sizes: dict | None, tol: float) -> Verdict:
    ca, cb = _find_entry(ta, name_a), _find_entry(tb, name_b)
    label = name_a
    quantum = [p for p in ca.params if p.type.is_quantum]
    try:
        if quantum and len(quantum) == len(ca.params):
            counts_a, counts_b = _wire_counts(ca, sizes), _wire_counts(cb, sizes)
            if counts_a != counts_b:
                return Verdict("Inequivalent", ("<signature>",), 1.0, 0.0, entry=label)
            n = sum(counts_a)
            if not (_uses_nonunitary(ta, ca) or _uses_nonunitary(tb, cb)) and n <= MAX_UNITARY_WIRES:
                try:
                    ua = unitary_of(ta, name_a, sizes=sizes, limits=limits)
                    ub = unitary_of(tb, name_b, sizes=sizes, limits=limits)
                except SimulationError as e:
                    if e.code != "E_RELEASE_NONZERO":
                        raise
                else:
                    if phase_fidelity(ua, ub) >= 1.0 - tol:
                        return Verdict("Equivalent", entry=label)
                    w, pa, pb = _unitary_witness(ua, ub, n)
                    return Verdict("Inequivalent", w, pa, pb, entry=label)
            # Measuring entries: compare per basis input, observing the outputs.
            for j in range(1 << n):
                da = _explore(ta, ca, limits, lambda m: _bind_wires(m, ca, counts_a), n, j, True, True)
                db = _explore(tb, cb, limits, lambda m: _bind_wires(m, cb, counts_b), n, j, True, True)
                v = compare_distributions(da, db, tol, label)
                if not v.equivalent:
                    return Verdict(v.kind, (f"<in {j:0{n}b}>",) + v.witness, v.p_a, v.p_b, entry=label)
            return Verdict("Equivalent", entry=label)
        argv_a, argv_b = _classical_args(ca, args), _classical_args(cb, args)
        da = _explore(ta, ca, limits, lambda m: list(argv_a), capture_errors=True)
        db = _explore(tb, cb, limits, lambda m: list(argv_b), capture_errors=True)
        return compare_distributions(da, db, tol, label)
    except SimulationError as e:
        if e.code == "E_LIMIT":
            return Verdict("Inconclusive", reason=e.diagnostics[0].message, entry=label)
        raise


def check_equivalence(ast_a, ast_b, entry: str | None = None, limits: Limits | dict | None = None,
                      args: dict | None = None, entry_b: str | None = None,
                      renamed: dict[str, str] | None = None, sizes: dict | None = None,
                      tol: float = DIST_TOL) -> Verdict:
    """Compare observable behaviour of two programs.

    With no ``entry`` every entry point of ``ast_a`` is compared; ``renamed``
    maps qualified callable names of A to their names in B.
    """
    limits = limits if isinstance(limits, Limits) else Limits.from_mapping(limits)
    ta, tb = prepare(ast_a), prepare(ast_b)
    renamed = renamed or {}
    if entry is not None:
        pairs = [(entry, entry_b or renamed.get(entry, entry))]
    else:
        names = [".".join(e) for e in sorted(entry_points(ta.program))]
        if not names:
            raise fail("E_PRECONDITION", "program has no entry point")
        pairs = [(nm, renamed.get(nm, nm)) for nm in names]
    inconclusive = None
    for name_a, name_b in pairs:
        v = _check_entry(ta, tb, name_a, name_b, limits, args, sizes, tol)
        if v.kind == "Inequivalent":
            return v
        if v.kind == "Inconclusive" and inconclusive is None:
            inconclusive = v
    return inconclusive or EQUIVALENT


def _sequence_source(ops, arity: int) -> str:
    lines = []
    for op in ops:
        names = [f"q{w}" for w in op.wires]
        if op.controlled:
            lines.append(f"Controlled {op.gate}([{', '.join(names[:-1])}], {names[-1]});")
        else:
            lines.append(f"{op.gate}({', '.join(names)});")
    params = ", ".join(f"q{i} : Qubit" for i in range(arity))
    body = "\n        ".join(lines)
    return f"operation Seq({params}) : Unit {{\n        {body}\n    }}"


def rule_unitaries(rule) -> tuple[np.ndarray, np.ndarray]:
    """Unitaries of both sides of a gate rule, built by simulating generated source."""
    src = (
        "namespace RuleCheck {\n"
        f"    {_sequence_source(rule.lhs, rule.arity).replace('Seq', 'Lhs')}\n"
        f"    {_sequence_source(rule.rhs, rule.arity).replace('Seq', 'Rhs')}\n"
        "}\n"
    )
    table = prepare(src)
    return unitary_of(table, "RuleCheck.Lhs"), unitary_of(table, "RuleCheck.Rhs")


def matrix_rule_check(rule, tol: float = MATRIX_TOL) -> bool:
    """True when both sides of ``rule`` agree up to global phase within ``tol``."""
    if rule.arity > 3:
        return False
    a, b = rule_unitaries(rule)
    return phase_fidelity(a, b) >= 1.0 - tol
