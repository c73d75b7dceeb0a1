"""Command-line interface: ``qrt list | apply | check | pdg | fmt``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from .analysis import analyze, build_pdg, check_quantum_safety
from .refactor import RefactoringRequest, apply_refactoring, catalog
from .sim import SimulationError, check_equivalence
from .sim.machine import Limits
from .syntax import Diagnostic, DiagnosticError, parse, print_program

EXIT_OK = 0
EXIT_DIFFERS = 1
EXIT_PRECONDITION = 2
EXIT_INEQUIVALENT = 3
EXIT_INPUT = 4
EXIT_INCONCLUSIVE = 5

VERDICT_EXIT = {"Equivalent": EXIT_OK, "Inequivalent": EXIT_INEQUIVALENT, "Inconclusive": EXIT_INCONCLUSIVE}


class InputError(Exception):
    """The input could not be read, parsed or resolved."""

    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        super().__init__(diagnostics)
        self.diagnostics = diagnostics


# ------------------------------------------------------------------ helpers


def _report(diags, path: str | None = None) -> None:
    for d in diags:
        text = d.format()
        if path and d.span.file.startswith("<"):
            text = path + text[len(d.span.file):]
        print(text, file=sys.stderr)


def _read(path: str) -> str:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as e:
        raise InputError([Diagnostic("E_IO", f"cannot read {path}: {e.strerror}")]) from None
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        raise InputError([Diagnostic("E_IO", f"{path} is not valid UTF-8")]) from None


def _load(path: str, resolve: bool = True):
    source = _read(path)
    try:
        program = parse(source, file=path)
    except DiagnosticError as e:
        raise InputError(e.diagnostics) from None
    if resolve:
        table, diags = analyze(program)
        diags = list(diags) or check_quantum_safety(table.program, table)
        if diags:
            raise InputError(list(diags))
    return source, program


def write_atomic(path: str, text: str) -> None:
    """Replace ``path`` with ``text`` via a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".qrt-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        if os.path.exists(path):
            os.chmod(tmp, os.stat(path).st_mode & 0o7777)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def limits_from(args) -> Limits:
    data = {}
    env = os.environ.get("QRT_LIMITS")
    if env:
        try:
            data.update(json.loads(env))
        except json.JSONDecodeError as e:
            raise SystemExit(f"qrt: QRT_LIMITS is not valid JSON: {e}") from None
    if getattr(args, "max_qubits", None) is not None:
        data["maxQubits"] = args.max_qubits
    if getattr(args, "max_branches", None) is not None:
        data["maxBranches"] = args.max_branches
    try:
        return Limits.from_mapping(data)
    except ValueError as e:
        raise SystemExit(f"qrt: {e}") from None


def _emit(args, obj, text: str) -> None:
    if args.json:
        print(json.dumps(obj, indent=2))
    elif text:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# -------------------------------------------------------------- subcommands


def cmd_list(args) -> int:
    entries = catalog()
    if args.json:
        print(json.dumps([e.to_dict() for e in entries], indent=2))
        return EXIT_OK
    for e in entries:
        print(f"{e.name}  [{'; '.join(e.rows)}]")
        print(f"    {e.description}")
        print(f"    target: {e.target}")
        for a in e.args:
            flag = "required" if a.required else "optional"
            print(f"    --arg {a.name}=<{a.kind}>  ({flag}) {a.help}".rstrip())
    return EXIT_OK


def _parse_arg(text: str) -> tuple[str, object]:
    key, eq, value = text.partition("=")
    if not eq or not key:
        raise SystemExit(f"qrt: --arg expects key=value, got {text!r}")
    if value[:1] in "{[":
        try:
            return key, json.loads(value)
        except json.JSONDecodeError:
            pass
    return key, value


def _requests(args) -> list[RefactoringRequest]:
    if args.request:
        text = sys.stdin.read() if args.request == "-" else _read(args.request)
        try:
            doc = json.loads(text)
            items = doc if isinstance(doc, list) else [doc]
            return [RefactoringRequest.from_dict(d) for d in items]
        except (json.JSONDecodeError, ValueError) as e:
            raise InputError([Diagnostic("E_PRECONDITION", f"bad request document: {e}")]) from None
    if not args.refactoring or not args.target:
        raise InputError([Diagnostic("E_PRECONDITION", "apply needs --refactoring and --target (or --request)")])
    extra = dict(_parse_arg(a) for a in args.arg or ())
    if args.split:
        extra["partition"] = args.split
    return [RefactoringRequest(args.refactoring, args.target, extra)]


def cmd_apply(args) -> int:
    source, program = _load(args.file)
    try:
        requests = _requests(args)
    except InputError as e:
        _report(e.diagnostics, args.file)
        return EXIT_PRECONDITION
    limits = limits_from(args)
    current, changes, results = program, [], []
    for req in requests:
        result = apply_refactoring(current, req, verify=not args.no_verify, entry=args.entry, limits=limits)
        results.append(result)
        if not result.ok:
            _report(result.diagnostics, args.file)
            return EXIT_PRECONDITION
        if result.verdict is not None and not result.verdict.equivalent:
            print(result.verdict.describe(), file=sys.stderr)
            if args.json:
                print(json.dumps(result.to_dict(), indent=2))
            return VERDICT_EXIT[result.verdict.kind]
        changes.extend(result.changes)
        current = result.program
    new_source = print_program(current)
    for c in changes:
        print(c, file=sys.stderr)
    if args.write and current is not program:
        write_atomic(args.file, new_source)
    name = os.path.basename(args.file)
    final = results[-1]
    final.original = program
    final.program = current
    diff = final.diff(before=print_program(program), name=name)
    if args.json:
        obj = final.to_dict()
        obj["changes"] = changes
        obj["diff"] = diff
        print(json.dumps(obj, indent=2))
    elif args.full:
        sys.stdout.write(new_source)
    else:
        sys.stdout.write(diff)
    return EXIT_OK


def cmd_check(args) -> int:
    _, a = _load(args.file_a)
    _, b = _load(args.file_b)
    try:
        verdict = check_equivalence(a, b, entry=args.entry, limits=limits_from(args))
    except (SimulationError, DiagnosticError) as e:
        _report(e.diagnostics)
        return EXIT_INCONCLUSIVE
    _emit(args, verdict.to_dict(), verdict.describe())
    return VERDICT_EXIT[verdict.kind]


def cmd_pdg(args) -> int:
    _, program = _load(args.file)
    table, _ = analyze(program)
    try:
        sym = table.lookup(args.callable)
    except KeyError as e:
        _report([Diagnostic("E_UNRESOLVED", str(e.args[0]))], args.file)
        return EXIT_INPUT
    if sym.kind != "callable":
        _report([Diagnostic("E_UNRESOLVED", f"{args.callable!r} is not a callable")], args.file)
        return EXIT_INPUT
    pdg = build_pdg(sym.decl, table)
    if args.json:
        print(json.dumps({
            "callable": pdg.callable,
            "nodes": [{"id": n.id, "path": ".".join(map(str, n.path)) if n.path else None, "text": n.text}
                      for n in pdg.nodes],
            "edges": [{"src": e.src, "dst": e.dst, "kind": e.kind, "label": e.label} for e in pdg.edges],
        }, indent=2))
    else:
        sys.stdout.write(pdg.to_dot() if args.format == "dot" else pdg.to_text())
    return EXIT_OK


def cmd_fmt(args) -> int:
    source, program = _load(args.file, resolve=False)
    text = print_program(program)
    if args.check:
        if text != source:
            print(f"{args.file}: not in canonical form", file=sys.stderr)
            return EXIT_DIFFERS
        return EXIT_OK
    if args.write:
        if text != source:
            write_atomic(args.file, text)
        return EXIT_OK
    sys.stdout.write(text)
    return EXIT_OK


# ------------------------------------------------------------------- parser


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
    p.add_argument("--entry", default=d(None), help="entry point to verify (default: all entry points)")
    p.add_argument("--max-qubits", type=int, default=d(None), help="simulator qubit limit")
    p.add_argument("--max-branches", type=int, default=d(None), help="simulator branch limit")
    p.add_argument("--no-verify", action="store_true", default=d(False), help="skip equivalence checking")
    p.add_argument("--write", action="store_true", default=d(False), help="rewrite the input file in place")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrt", description="Refactoring toolkit for a Q# subset.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", parents=[common], help="show the refactoring catalog")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("apply", parents=[common], help="apply a refactoring and print a diff")
    p.add_argument("file")
    p.add_argument("--refactoring", "-r")
    p.add_argument("--target", "-t")
    p.add_argument("--arg", "-a", action="append", metavar="KEY=VALUE")
    p.add_argument("--split", metavar="PARTITION", help="shorthand for --arg partition=...")
    p.add_argument("--request", metavar="JSON", help="request document file ('-' for stdin)")
    p.add_argument("--full", action="store_true", help="print the whole new source instead of a diff")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("check", parents=[common], help="compare the behaviour of two programs")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("pdg", parents=[common], help="print a callable's dependence graph")
    p.add_argument("file")
    p.add_argument("callable")
    p.add_argument("--format", choices=("text", "dot"), default="text")
    p.set_defaults(func=cmd_pdg)

    p = sub.add_parser("fmt", parents=[common], help="print the canonical form of a file")
    p.add_argument("file")
    p.add_argument("--check", action="store_true", help="exit 1 if the file is not canonical")
    p.set_defaults(func=cmd_fmt)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        _report(e.diagnostics, getattr(args, "file", None))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
