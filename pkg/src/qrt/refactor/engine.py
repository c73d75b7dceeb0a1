"""Refactoring catalog, requests and the checked application wrapper."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Callable

from ..analysis.safety import check_quantum_safety
from ..analysis.symbols import analyze
from ..analysis.unused import entry_points
from ..syntax import ast as A
from ..syntax.diagnostics import Diagnostic, DiagnosticError
from ..syntax.parser import parse
from ..syntax.printer import print_program
from . import cleanup, extract, gates, inline, loops, merge, naming
from .base import Context, EditResult, Precondition


@dataclass(frozen=True)
class ArgSpec:
    name: str
    kind: str  # "str" | "int" | "any"
    required: bool = False
    help: str = ""

    def convert(self, value):
        if self.kind == "int":
            try:
                return int(value)
            except (TypeError, ValueError):
                raise ValueError(f"argument {self.name!r} must be an integer, got {value!r}") from None
        if self.kind == "str" and not isinstance(value, str):
            raise ValueError(f"argument {self.name!r} must be a string")
        return value


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    func: Callable
    rows: tuple[str, ...]
    description: str
    target: str
    args: tuple[ArgSpec, ...] = ()

    @property
    def required(self) -> list[str]:
        return [a.name for a in self.args if a.required]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rows": list(self.rows),
            "description": self.description,
            "target": self.target,
            "args": [{"name": a.name, "type": a.kind, "required": a.required, "help": a.help}
                     for a in self.args],
        }


_NEW_NAME = ArgSpec("new_name", "str", help="name of the created callable (default: generated)")

_ENTRIES = [
    CatalogEntry("rename", naming.rename, ("Rename Variable", "Rename Parameter", "Rename Operation"),
                 "Give a variable, parameter or callable a new name at its declaration and every use.",
                 "symbol", (ArgSpec("new_name", "str", True, "the new identifier"),)),
    CatalogEntry("change-signature", naming.change_signature,
                 ("Add Parameter", "Remove Parameter", "Reorder Parameters"),
                 "Add, drop or permute parameters of a callable and update every call.",
                 "callable",
                 (ArgSpec("add", "any", help="name:Type=default, appended last"),
                  ArgSpec("remove", "str", help="parameter to drop (must be unused)"),
                  ArgSpec("reorder", "any", help="new order as comma-separated old positions"))),
    CatalogEntry("extract-operation", extract.extract_operation, ("Extract Operation",),
                 "Move a statement range into a new operation and call it in place.",
                 "range", (_NEW_NAME,)),
    CatalogEntry("extract-function", extract.extract_function_from_operation,
                 ("Extract Function from Operation",),
                 "Move a purely classical statement range into a new function.",
                 "range", (_NEW_NAME,)),
    CatalogEntry("extract-namespace", extract.extract_namespace, ("Extract Namespace",),
                 "Move callables into a fresh namespace and open it where they are used.",
                 "callables", (ArgSpec("new_namespace", "str", True, "name of the namespace to create"),)),
    CatalogEntry("inline", inline.inline_callable, ("Inline Operation", "Inline Function into Operation"),
                 "Replace calls with the callee body; a bare callable target inlines every call and drops it.",
                 "callable or statement", (ArgSpec("callee", "str", help="which callee at the site"),)),
    CatalogEntry("split-operation", extract.split_operation, ("Split Operation",),
                 "Break a callable body into consecutive parts, each moved into its own operation.",
                 "callable",
                 (ArgSpec("partition", "any", True, "lo..hi:Name,lo..hi:Name"),
                  ArgSpec("param_names", "any", help="mapping old name -> parameter name"))),
    CatalogEntry("merge-operations", merge.merge_operations, ("Merge Operations",),
                 "Collapse callables with identical bodies into one; one differing literal becomes a parameter.",
                 "callables",
                 (ArgSpec("merged_name", "str", help="name of the surviving callable"),
                  ArgSpec("param_name", "str", help="parameter name if a literal differs"))),
    CatalogEntry("parameterize-operation", merge.parameterize_operation, ("Parameterize Operation",),
                 "Turn a literal (or the literals on which several clones differ) into a parameter.",
                 "callables",
                 (ArgSpec("param_name", "str"), _NEW_NAME,
                  ArgSpec("index", "int", help="which literal, in source order, for a single target"))),
    CatalogEntry("specialize-operation", merge.specialize_operation, ("Specialize Operation",),
                 "Create a copy of a callable with a call's literal arguments built in.",
                 "statement", (_NEW_NAME, ArgSpec("callee", "str"))),
    CatalogEntry("merge-gates", gates.merge_gates, ("Merge Gate",),
                 "Cancel or shorten pairs of adjacent gates on the same qubits until nothing changes.",
                 "callable or range"),
    CatalogEntry("replace-gate", gates.replace_gate, ("Replace Gate",),
                 "Swap a gate (or gate triple) for an equivalent sequence from the rule table.",
                 "statement or range", (ArgSpec("rule", "str", True, "e.g. Z->HXH, CNOT->CX"),)),
    CatalogEntry("reorder-instructions", cleanup.reorder_instructions, ("Reorder Instructions",),
                 "Swap two statements of one block when the dependence graph allows it.",
                 "statement", (ArgSpec("other", "str", True, "path of the second statement"),)),
    CatalogEntry("order-qubits", gates.order_qubits, ("Order Qubit",),
                 "Relabel the positions of a freshly allocated qubit array.",
                 "statement", (ArgSpec("permutation", "any", True, "comma-separated new positions"),)),
    CatalogEntry("consolidate-measurements", gates.consolidate_measurements, ("Consolidate Measurement",),
                 "Fold consecutive single-qubit measurements into one MultiM.",
                 "range", (ArgSpec("name", "str", help="result array name (default rs)"),)),
    CatalogEntry("unroll-loop", loops.unroll_loop, ("Unroll Loop",),
                 "Expand a constant-bound for loop into copies of its body.",
                 "statement", (ArgSpec("limit", "int", help="maximum iteration count (default 64)"),)),
    CatalogEntry("roll-loop", loops.roll_loop, ("Introduce Classical Control",),
                 "Wrap repeated statements, possibly differing in one counting literal, in a for loop.",
                 "range",
                 (ArgSpec("var", "str", help="loop variable (default i)"),
                  ArgSpec("period", "int", help="statements per iteration"))),
    CatalogEntry("remove-unused", cleanup.remove_unused, ("Remove Variable", "Remove Operation"),
                 "Delete a declaration nobody reads, keeping any side effects of its initializer.",
                 "symbol"),
    CatalogEntry("remove-code-duplication", extract.remove_code_duplication, ("Remove Code Duplication",),
                 "Extract a repeated statement sequence once and call it from both places.",
                 "callable",
                 (_NEW_NAME, ArgSpec("index", "int", help="which clone pair"),
                  ArgSpec("min_len", "int"), ArgSpec("pair", "any", help="two start paths and a length"))),
]

CATALOG: dict[str, CatalogEntry] = {e.name: e for e in sorted(_ENTRIES, key=lambda e: e.name)}
CATALOG_ROWS = frozenset(r for e in _ENTRIES for r in e.rows)


def catalog() -> list[CatalogEntry]:
    """Entries in alphabetical order."""
    return list(CATALOG.values())


def _snake(key: str) -> str:
    return re.sub(r"(?<=[a-z0-9])([A-Z])", r"_\1", key).replace("-", "_").lower()


@dataclass
class RefactoringRequest:
    refactoring: str
    target: str
    args: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "RefactoringRequest":
        if not isinstance(d, dict) or "refactoring" not in d or "target" not in d:
            raise ValueError("request needs 'refactoring' and 'target'")
        return cls(str(d["refactoring"]), d["target"], dict(d.get("args") or {}))

    @classmethod
    def from_json(cls, text: str) -> "RefactoringRequest":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {"refactoring": self.refactoring, "target": self.target, "args": dict(self.args)}

    def validated(self) -> tuple[CatalogEntry, dict]:
        name = self.refactoring.replace("_", "-")
        entry = CATALOG.get(name)
        if entry is None:
            raise ValueError(f"unknown refactoring {self.refactoring!r}")
        specs = {a.name: a for a in entry.args}
        out = {}
        for key, value in self.args.items():
            k = _snake(key)
            if k not in specs:
                raise ValueError(f"{entry.name} takes no argument {key!r}")
            out[k] = specs[k].convert(value)
        missing = [a for a in entry.required if a not in out]
        if missing:
            raise ValueError(f"{entry.name} requires argument(s): {', '.join(missing)}")
        return entry, out


def _failure(program, code: str, message: str) -> EditResult:
    return EditResult(program, [], [Diagnostic(code, message)], {}, program)


def _entries_kept(before: A.Program, after: A.Program, renamed: dict) -> bool:
    new = {f"{ns}.{n}" for ns, n in entry_points(after)}
    return all(renamed.get(q, q) in new for q in (f"{ns}.{n}" for ns, n in entry_points(before)))


def apply_refactoring(program, request: RefactoringRequest | dict, *, verify: bool = False,
                      entry: str | None = None, limits=None) -> EditResult:
    """Apply one catalog entry; on any failure the input program comes back unchanged."""
    if isinstance(program, str):
        program = parse(program)
    if isinstance(request, dict):
        request = RefactoringRequest.from_dict(request)
    table, diags = analyze(program)
    if diags:
        return EditResult(program, [], list(diags), {}, program)
    issues = check_quantum_safety(table.program, table)
    if issues:
        return EditResult(program, [], list(issues), {}, program)
    try:
        spec, args = request.validated()
    except ValueError as e:
        return _failure(program, "E_PRECONDITION", str(e))
    try:
        ctx = Context(program)
        target = request.target
        if spec.target in ("callables",) and isinstance(target, str):
            target = [t.strip() for t in target.split(",") if t.strip()]
        new, changes, renamed = spec.func(ctx, target, **args)
    except Precondition as e:
        return _failure(program, "E_PRECONDITION", f"{spec.name}: {e}")
    if new is ctx.program:
        # a no-op hands back the caller's own object
        result = EditResult(program, list(changes), [], dict(renamed), program)
        if verify:
            from ..sim.oracle import EQUIVALENT
            result.verdict = EQUIVALENT
        return result
    new_table, diags = analyze(new)
    problems = list(diags) or check_quantum_safety(new_table.program, new_table)
    if problems:
        return _failure(program, "E_PRECONDITION",
                        f"{spec.name}: result is not well-formed ({problems[0].format()})")
    try:
        reparsed = parse(print_program(new))
    except DiagnosticError as e:
        return _failure(program, "E_PRECONDITION", f"{spec.name}: result does not re-parse ({e})")
    if reparsed != new:
        return _failure(program, "E_PRECONDITION", f"{spec.name}: printed result does not round-trip")
    if not _entries_kept(program, new, renamed):
        return _failure(program, "E_PRECONDITION", f"{spec.name}: an entry point would disappear")
    result = EditResult(new, list(changes), [], dict(renamed), program)
    if verify:
        from ..sim import check_equivalence
        try:
            result.verdict = check_equivalence(program, new, entry=entry, limits=limits, renamed=renamed)
        except DiagnosticError as e:
            from ..sim.oracle import Verdict
            result.verdict = Verdict("Inconclusive", reason=str(e))
    return result
