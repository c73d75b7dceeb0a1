"""Name resolution and type checking against the builtin registry."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..syntax import ast as A
from ..syntax.builtins import BUILTINS, GATE_REF, SINGLE_QUBIT_GATES
from ..syntax.diagnostics import NO_SPAN, Diagnostic, DiagnosticError, SourceSpan

CALLABLE_REF = A.Type("Callable")

SYMBOL_KINDS = ("variable", "parameter", "callable", "loopVar", "qubitBinding")


class ResolveError(DiagnosticError):
    pass


@dataclass
class Symbol:
    id: int
    name: str
    kind: str
    type: A.Type | None
    span: SourceSpan
    decl: A.Node
    namespace: str
    owner: str | None = None  # qualified callable name for locals
    mutable: bool = False

    @property
    def qualified(self) -> str:
        if self.kind == "callable":
            return f"{self.namespace}.{self.name}"
        return f"{self.owner}.{self.name}"


@dataclass
class SymbolTable:
    program: A.Program
    symbols: list[Symbol] = field(default_factory=list)
    # id(node) -> symbol id for declarations, reads (Ident/Call) and writes (Set)
    refs: dict[int, int] = field(default_factory=dict)
    uses: dict[int, list[A.Node]] = field(default_factory=dict)
    writes: dict[int, list[A.Node]] = field(default_factory=dict)
    types: dict[int, A.Type] = field(default_factory=dict)
    callables: dict[str, Symbol] = field(default_factory=dict)
    # names visible (name -> symbol id) just before each statement, by id(stmt)
    scopes: dict[int, dict[str, int]] = field(default_factory=dict)
    namespace_of: dict[int, str] = field(default_factory=dict)

    def symbol_of(self, node: A.Node) -> Symbol | None:
        sid = self.refs.get(id(node))
        return None if sid is None else self.symbols[sid]

    def type_of(self, expr: A.Node) -> A.Type | None:
        return self.types.get(id(expr))

    def callable_symbol(self, ns: str, name: str) -> Symbol | None:
        return self.callables.get(f"{ns}.{name}")

    def locals_of(self, qualified: str) -> list[Symbol]:
        return [s for s in self.symbols if s.owner == qualified]

    def use_count(self, sym: Symbol) -> int:
        return len(self.uses.get(sym.id, ()))

    def visible_at(self, stmt: A.Node) -> dict[str, int]:
        return self.scopes.get(id(stmt), {})

    def lookup(self, locator: str) -> Symbol:
        """Find a symbol by ``Ns.Callable`` or ``Ns.Callable.name[#k]``."""
        sym = self._lookup_callable(locator)
        if sym is not None:
            return sym
        head, _, tail = locator.rpartition(".")
        owner = self._lookup_callable(head) if head else None
        if owner is None:
            raise KeyError(f"no symbol {locator!r}")
        name, _, nth = tail.partition("#")
        matches = [s for s in self.locals_of(owner.qualified) if s.name == name]
        k = int(nth) if nth.isdigit() else 1
        if not matches or k > len(matches) or k < 1:
            raise KeyError(f"no symbol {locator!r}")
        if len(matches) > 1 and not nth:
            raise KeyError(f"{locator!r} is ambiguous; add #k to pick a declaration")
        return matches[k - 1]

    def _lookup_callable(self, locator: str) -> Symbol | None:
        if locator in self.callables:
            return self.callables[locator]
        hits = [s for q, s in self.callables.items() if q.rsplit(".", 1)[-1] == locator]
        return hits[0] if len(hits) == 1 else None


def compatible(expected: A.Type | None, actual: A.Type | None) -> bool:
    if expected is None or actual is None:
        return True
    if expected.name != actual.name:
        return False
    if expected.name == "Array":
        return compatible(expected.elem, actual.elem)
    return True


def _span_of(node: A.Node) -> SourceSpan:
    return getattr(node, "span", NO_SPAN)


class _Scope:
    def __init__(self, parent: "_Scope | None") -> None:
        self.parent = parent
        self.names: dict[str, int] = {}
        self.closed_qubits: set[str] = set()

    def find(self, name: str) -> int | None:
        s = self
        while s is not None:
            if name in s.names:
                return s.names[name]
            s = s.parent
        return None

    def escaped(self, name: str) -> bool:
        s = self
        while s is not None:
            if name in s.closed_qubits:
                return True
            s = s.parent
        return False

    def flatten(self) -> dict[str, int]:
        chain = []
        s = self
        while s is not None:
            chain.append(s.names)
            s = s.parent
        out: dict[str, int] = {}
        for names in reversed(chain):
            out.update(names)
        return out


class Resolver:
    def __init__(self, program: A.Program) -> None:
        self.program = A.unshare(program)
        self.table = SymbolTable(self.program)
        self.diags: list[Diagnostic] = []
        self.ns: A.Namespace | None = None
        self.current: A.Callable | None = None
        self.current_q: str | None = None

    # ---------------------------------------------------------------- utils

    def error(self, code: str, message: str, node_or_span) -> None:
        span = node_or_span if isinstance(node_or_span, SourceSpan) else _span_of(node_or_span)
        self.diags.append(Diagnostic(code, message, span))

    def declare(self, scope: _Scope, name: str, kind: str, t, decl, span, mutable=False) -> Symbol:
        if name in BUILTINS:
            self.error("E_REDECLARED", f"{name!r} shadows a builtin", span)
        if name in scope.names:
            self.error("E_REDECLARED", f"{name!r} is already declared in this scope", span)
        sym = Symbol(len(self.table.symbols), name, kind, t, span, decl, self.ns.name,
                     self.current_q, mutable)
        self.table.symbols.append(sym)
        scope.names[name] = sym.id
        self.table.refs[id(decl)] = sym.id
        return sym

    def use(self, node: A.Node, sid: int) -> None:
        self.table.refs[id(node)] = sid
        self.table.uses.setdefault(sid, []).append(node)

    def find_callable(self, name: str) -> Symbol | None | str:
        own = self.table.callables.get(f"{self.ns.name}.{name}")
        if own is not None:
            return own
        hits = []
        for o in self.ns.opens:
            s = self.table.callables.get(f"{o}.{name}")
            if s is not None:
                hits.append(s)
        if len(hits) > 1:
            return "ambiguous"
        return hits[0] if hits else None

    # ------------------------------------------------------------ top level

    def run(self) -> tuple[SymbolTable, list[Diagnostic]]:
        seen_ns: set[str] = set()
        for ns in self.program.namespaces:
            if ns.name in seen_ns:
                self.error("E_REDECLARED", f"namespace {ns.name!r} declared twice", ns)
            seen_ns.add(ns.name)
            self.ns = ns
            for c in ns.callables:
                q = f"{ns.name}.{c.name}"
                if q in self.table.callables:
                    self.error("E_REDECLARED", f"callable {c.name!r} declared twice", c.name_span)
                    continue
                if c.name in BUILTINS:
                    self.error("E_REDECLARED", f"{c.name!r} shadows a builtin", c.name_span)
                sym = Symbol(len(self.table.symbols), c.name, "callable", c.return_type,
                             c.name_span, c, ns.name)
                self.table.symbols.append(sym)
                self.table.callables[q] = sym
                self.table.refs[id(c)] = sym.id
        for ns in self.program.namespaces:
            self.ns = ns
            for c in ns.callables:
                if self.table.refs.get(id(c)) is None:
                    continue
                self.callable(c)
        self.diags.sort(key=lambda d: (d.span.file, d.span.start))
        return self.table, self.diags

    def callable(self, c: A.Callable) -> None:
        self.current = c
        self.current_q = f"{self.ns.name}.{c.name}"
        self.table.namespace_of[id(c)] = self.ns.name
        scope = _Scope(None)
        for p in c.params:
            kind = "parameter"
            self.declare(scope, p.name, kind, p.type, p, p.span)
        self.block(c.body, scope, new_scope=False)
        if c.return_type != A.UNIT and not _always_returns(c.body):
            self.error("E_TYPE", f"{c.name!r} does not return a value on every path", c.name_span)
        self.current = None
        self.current_q = None

    # ------------------------------------------------------------ statements

    def block(self, block: A.Block, scope: _Scope, new_scope: bool = True) -> _Scope:
        inner = _Scope(scope) if new_scope else scope
        for s in block.stmts:
            self.stmt(s, inner)
        return inner

    def stmt(self, s, scope: _Scope) -> None:
        self.table.scopes[id(s)] = scope.flatten()
        if isinstance(s, (A.Let, A.Mutable)):
            t = self.expr(s.value, scope)
            if t is not None and t.is_quantum:
                self.error("E_QUBIT_ESCAPE", "qubits cannot be bound to a variable", s.value)
            elif t == A.UNIT:
                self.error("E_TYPE", "cannot bind a Unit value", s.value)
            self.declare(scope, s.name, "variable", t, s, s.name_span, isinstance(s, A.Mutable))
        elif isinstance(s, A.Set):
            t = self.expr(s.value, scope)
            sid = scope.find(s.name)
            if sid is None:
                self.unresolved(s.name, s.name_span, scope)
                return
            sym = self.table.symbols[sid]
            self.table.refs[id(s)] = sid
            self.table.writes.setdefault(sid, []).append(s)
            if not sym.mutable:
                self.error("E_TYPE", f"cannot assign to immutable {s.name!r}", s.name_span)
            elif not compatible(sym.type, t):
                self.error("E_TYPE", f"cannot assign {t} to {s.name!r} of type {sym.type}", s.value)
        elif isinstance(s, A.Using):
            if s.size is not None:
                self.expect_type(s.size, scope, A.INT, "qubit array size")
            if self.current.kind == "function":
                pass  # reported by the safety checker
            inner = _Scope(scope)
            t = A.QUBIT if s.size is None else A.QUBIT_ARRAY
            self.declare(inner, s.name, "qubitBinding", t, s, s.name_span)
            self.block(s.body, inner, new_scope=False)
            scope.closed_qubits.add(s.name)
        elif isinstance(s, A.For):
            self.expect_type(s.range, scope, A.RANGE, "loop range")
            inner = _Scope(scope)
            self.declare(inner, s.var, "loopVar", A.INT, s, s.var_span)
            self.block(s.body, inner, new_scope=False)
        elif isinstance(s, A.If):
            self.expect_type(s.cond, scope, A.BOOL, "condition")
            self.block(s.then, scope)
            for e in s.elifs:
                self.expect_type(e.cond, scope, A.BOOL, "condition")
                self.block(e.body, scope)
            if s.else_ is not None:
                self.block(s.else_, scope)
        elif isinstance(s, A.Return):
            t = self.expr(s.value, scope)
            want = self.current.return_type
            if want == A.UNIT:
                self.error("E_TYPE", "return with a value in a Unit callable", s)
            elif not compatible(want, t):
                self.error("E_TYPE", f"returns {t}, expected {want}", s.value)
            if t is not None and t.is_quantum:
                self.error("E_QUBIT_ESCAPE", "qubits cannot be returned", s.value)
        elif isinstance(s, A.CallStmt):
            self.expr(s.expr, scope)

    def expect_type(self, e, scope, want: A.Type, what: str) -> None:
        t = self.expr(e, scope)
        if not compatible(want, t):
            self.error("E_TYPE", f"{what} must be {want}, found {t}", e)

    def unresolved(self, name: str, span, scope: _Scope) -> None:
        if scope.escaped(name):
            self.error("E_QUBIT_ESCAPE", f"qubit {name!r} used outside its using block", span)
        else:
            self.error("E_UNRESOLVED", f"unresolved name {name!r}", span)

    # ----------------------------------------------------------- expressions

    def expr(self, e, scope: _Scope) -> A.Type | None:
        t = self._expr(e, scope)
        if t is not None:
            self.table.types[id(e)] = t
        return t

    def _expr(self, e, scope: _Scope) -> A.Type | None:
        if isinstance(e, A.IntLit):
            return A.INT
        if isinstance(e, A.DoubleLit):
            return A.DOUBLE
        if isinstance(e, A.BoolLit):
            return A.BOOL
        if isinstance(e, (A.StringLit, A.InterpString)):
            if isinstance(e, A.InterpString):
                for part in e.parts:
                    if not isinstance(part, str):
                        self.expr(part, scope)
            return A.STRING
        if isinstance(e, A.ResultLit):
            return A.RESULT
        if isinstance(e, A.Ident):
            sid = scope.find(e.name)
            if sid is not None:
                self.use(e, sid)
                return self.table.symbols[sid].type
            if e.name in BUILTINS:
                return GATE_REF if e.name in SINGLE_QUBIT_GATES else CALLABLE_REF
            found = self.find_callable(e.name)
            if found == "ambiguous":
                self.error("E_UNRESOLVED", f"{e.name!r} is ambiguous between opened namespaces", e)
                return None
            if found is not None:
                self.use(e, found.id)
                return CALLABLE_REF
            self.unresolved(e.name, e.span, scope)
            return None
        if isinstance(e, A.ArrayLit):
            elem = None
            for item in e.items:
                t = self.expr(item, scope)
                if elem is None:
                    elem = t
                elif t is not None and not compatible(elem, t):
                    self.error("E_TYPE", f"array mixes {elem} and {t}", item)
            return A.Type("Array", elem)
        if isinstance(e, A.RangeExpr):
            self.expect_type(e.lo, scope, A.INT, "range bound")
            self.expect_type(e.hi, scope, A.INT, "range bound")
            return A.RANGE
        if isinstance(e, A.Index):
            bt = self.expr(e.base, scope)
            self.expect_type(e.index, scope, A.INT, "array index")
            if bt is None:
                return None
            if not bt.is_array:
                self.error("E_TYPE", f"cannot index a value of type {bt}", e.base)
                return None
            return bt.elem
        if isinstance(e, A.Slice):
            bt = self.expr(e.base, scope)
            self.expr(e.range, scope)
            if bt is not None and not bt.is_array:
                self.error("E_TYPE", f"cannot slice a value of type {bt}", e.base)
                return None
            return bt
        if isinstance(e, A.Binary):
            return self.binary(e, scope)
        if isinstance(e, A.Unary):
            t = self.expr(e.operand, scope)
            if e.op == "not":
                if not compatible(A.BOOL, t):
                    self.error("E_TYPE", f"'not' needs Bool, found {t}", e.operand)
                return A.BOOL
            if t is not None and t.name not in ("Int", "Double"):
                self.error("E_TYPE", f"cannot negate {t}", e.operand)
                return None
            return t
        if isinstance(e, A.Call):
            return self.call(e, scope)
        if isinstance(e, A.ControlledApply):
            ct = self.expr(e.controls, scope)
            if not compatible(A.QUBIT_ARRAY, ct):
                self.error("E_TYPE", f"controls must be Qubit[], found {ct}", e.controls)
            if len(e.args) != 1:
                self.error("E_ARITY", f"Controlled {e.gate} expects 1 target, got {len(e.args)}", e)
            for a in e.args:
                self.expect_type(a, scope, A.QUBIT, "target")
            return A.UNIT
        raise TypeError(f"unexpected node {e!r}")

    def binary(self, e: A.Binary, scope) -> A.Type | None:
        lt = self.expr(e.lhs, scope)
        rt = self.expr(e.rhs, scope)
        op = e.op
        if op in ("and", "or"):
            for side, t in ((e.lhs, lt), (e.rhs, rt)):
                if not compatible(A.BOOL, t):
                    self.error("E_TYPE", f"{op!r} needs Bool operands, found {t}", side)
            return A.BOOL
        if lt is None or rt is None:
            return A.BOOL if op in ("==", "!=", "<", "<=", ">", ">=") else (lt or rt)
        if op in ("==", "!="):
            if lt != rt or lt.name in ("Qubit", "Range", "Array", "Unit"):
                self.error("E_TYPE", f"cannot compare {lt} with {rt}", e)
            return A.BOOL
        numeric = lt == rt and lt.name in ("Int", "Double")
        if op in ("<", "<=", ">", ">="):
            if not numeric:
                self.error("E_TYPE", f"cannot order {lt} and {rt}", e)
            return A.BOOL
        if op == "+" and lt == rt == A.STRING:
            return A.STRING
        if not numeric or (op == "%" and lt != A.INT):
            self.error("E_TYPE", f"operator {op!r} not defined for {lt} and {rt}", e)
            return None
        return lt

    def call(self, e: A.Call, scope) -> A.Type | None:
        arg_types = [self.expr(a, scope) for a in e.args]
        if e.callee in BUILTINS:
            b = BUILTINS[e.callee]
            params, ret = b.params, b.returns
        else:
            found = self.find_callable(e.callee)
            if found == "ambiguous":
                self.error("E_UNRESOLVED", f"{e.callee!r} is ambiguous between opened namespaces",
                           e.callee_span)
                return None
            if found is None:
                if scope.find(e.callee) is not None:
                    self.error("E_TYPE", f"{e.callee!r} is not callable", e.callee_span)
                else:
                    self.error("E_UNRESOLVED", f"unresolved callable {e.callee!r}", e.callee_span)
                return None
            self.use(e, found.id)
            c = found.decl
            params, ret = tuple(p.type for p in c.params), c.return_type
        if len(params) != len(e.args):
            self.error("E_ARITY", f"{e.callee} expects {len(params)} argument(s), got {len(e.args)}", e)
            return ret
        for want, got, arg in zip(params, arg_types, e.args):
            if want == GATE_REF:
                self.check_gate_ref(arg)
            elif not compatible(want, got):
                self.error("E_TYPE", f"argument of {e.callee} must be {want}, found {got}", arg)
        return ret

    def check_gate_ref(self, arg) -> None:
        if isinstance(arg, A.Ident):
            if arg.name in SINGLE_QUBIT_GATES and self.table.refs.get(id(arg)) is None:
                return
            sym = self.table.symbol_of(arg)
            if sym is not None and sym.kind == "callable":
                c = sym.decl
                if c.is_operation and [p.type for p in c.params] == [A.QUBIT] and c.return_type == A.UNIT:
                    return
        self.error("E_TYPE", "expected a single-qubit operation", arg)


def _always_returns(block: A.Block) -> bool:
    if not block.stmts:
        return False
    last = block.stmts[-1]
    if isinstance(last, A.Return):
        return True
    if isinstance(last, A.If) and last.else_ is not None:
        return all(_always_returns(b) for b in last.blocks())
    if isinstance(last, A.Using):
        return _always_returns(last.body)
    return False


def analyze(program: A.Program) -> tuple[SymbolTable, list[Diagnostic]]:
    """Resolve names, returning the table together with any diagnostics."""
    return Resolver(program).run()


def resolve(program: A.Program) -> SymbolTable:
    """Resolve all names; raises :class:`ResolveError` if anything fails to bind or type."""
    table, diags = analyze(program)
    if diags:
        raise ResolveError(diags)
    return table
