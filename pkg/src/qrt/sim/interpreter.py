"""Tree-walking evaluator for resolved programs."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..analysis.symbols import SymbolTable
from ..syntax import ast as A
from ..syntax.builtins import BUILTINS
from .gates import CONTROLLED_FORMS
from .machine import Machine, Qubit, Result, fail

MAX_CALL_DEPTH = 200
_INT_MIN = -(1 << 63)


@dataclass(frozen=True)
class RangeValue:
    lo: int
    hi: int

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"


@dataclass(frozen=True)
class CallableRef:
    name: str  # builtin gate name, or "" for user callables
    decl: A.Callable | None = None


class _Return:
    __slots__ = ("value",)

    def __init__(self, value) -> None:
        self.value = value


def wrap_int(x: int) -> int:
    return ((x - _INT_MIN) % (1 << 64)) + _INT_MIN


def render(v) -> str:
    """String form of a value inside an interpolated string."""
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return "[" + ", ".join(render(x) for x in v) + "]"
    if isinstance(v, Qubit):
        return "Qubit"
    return str(v)


class Interpreter:
    def __init__(self, table: SymbolTable, machine: Machine, max_steps: int) -> None:
        self.table = table
        self.machine = machine
        self.max_steps = max_steps
        self.steps = 0
        self.depth = 0
        self.trace: list[str] = []

    # ------------------------------------------------------------ callables

    def call(self, c: A.Callable, args: list):
        if self.depth >= MAX_CALL_DEPTH:
            raise fail("E_LIMIT", f"steps: call depth exceeds {MAX_CALL_DEPTH}")
        refs = self.table.refs
        frame = {refs[id(p)]: v for p, v in zip(c.params, args)}
        self.depth += 1
        try:
            r = self.block(c.body, frame)
        finally:
            self.depth -= 1
        return r.value if r is not None else None

    # ----------------------------------------------------------- statements

    def block(self, block: A.Block, frame: dict):
        for s in block.stmts:
            r = self.stmt(s, frame)
            if r is not None:
                return r
        return None

    def stmt(self, s, frame: dict):
        self.steps += 1
        if self.steps > self.max_steps:
            raise fail("E_LIMIT", f"steps: more than {self.max_steps} statements on one path")
        refs = self.table.refs
        if isinstance(s, A.CallStmt):
            self.eval(s.expr, frame)
        elif isinstance(s, (A.Let, A.Mutable, A.Set)):
            frame[refs[id(s)]] = self.eval(s.value, frame)
        elif isinstance(s, A.Using):
            if s.size is None:
                qs = self.machine.allocate(1)
                frame[refs[id(s)]] = qs[0]
            else:
                k = self.eval(s.size, frame)
                qs = self.machine.allocate(k)
                frame[refs[id(s)]] = tuple(qs)
            r = self.block(s.body, frame)
            self.machine.release(qs)
            return r
        elif isinstance(s, A.For):
            rng = self.eval(s.range, frame)
            sid = refs[id(s)]
            for v in range(rng.lo, rng.hi + 1):
                frame[sid] = v
                r = self.block(s.body, frame)
                if r is not None:
                    return r
                self.steps += 1
                if self.steps > self.max_steps:
                    raise fail("E_LIMIT", f"steps: more than {self.max_steps} statements on one path")
        elif isinstance(s, A.If):
            if self.eval(s.cond, frame):
                return self.block(s.then, frame)
            for e in s.elifs:
                if self.eval(e.cond, frame):
                    return self.block(e.body, frame)
            if s.else_ is not None:
                return self.block(s.else_, frame)
        elif isinstance(s, A.Return):
            return _Return(self.eval(s.value, frame))
        else:
            raise TypeError(f"unexpected statement {s!r}")
        return None

    # ---------------------------------------------------------- expressions

    def eval(self, e, frame: dict):
        t = type(e)
        if t is A.IntLit or t is A.DoubleLit or t is A.BoolLit or t is A.StringLit:
            return e.value
        if t is A.Ident:
            sid = self.table.refs.get(id(e))
            if sid is None:
                return CallableRef(e.name)
            sym = self.table.symbols[sid]
            if sym.kind == "callable":
                return CallableRef("", sym.decl)
            return frame[sid]
        if t is A.Call:
            return self.call_expr(e, frame)
        if t is A.Binary:
            return self.binary(e, frame)
        if t is A.Index:
            base = self.eval(e.base, frame)
            i = self.eval(e.index, frame)
            if not 0 <= i < len(base):
                raise fail("E_RUNTIME", f"index {i} out of range for array of length {len(base)}")
            return base[i]
        if t is A.InterpString:
            return "".join(p if isinstance(p, str) else render(self.eval(p, frame)) for p in e.parts)
        if t is A.ResultLit:
            return Result[e.value]
        if t is A.ArrayLit:
            return tuple(self.eval(x, frame) for x in e.items)
        if t is A.RangeExpr:
            return RangeValue(self.eval(e.lo, frame), self.eval(e.hi, frame))
        if t is A.Slice:
            base = self.eval(e.base, frame)
            r = self.eval(e.range, frame)
            if r.lo > r.hi:
                return ()
            if r.lo < 0 or r.hi >= len(base):
                raise fail("E_RUNTIME", f"slice {r} out of range for array of length {len(base)}")
            return base[r.lo: r.hi + 1]
        if t is A.Unary:
            v = self.eval(e.operand, frame)
            if e.op == "not":
                return not v
            return wrap_int(-v) if isinstance(v, int) else -v
        if t is A.ControlledApply:
            controls = self.eval(e.controls, frame)
            target = self.eval(e.args[0], frame)
            self.machine.gate(e.gate, controls, target)
            return None
        raise TypeError(f"unexpected expression {e!r}")

    def binary(self, e: A.Binary, frame: dict):
        op = e.op
        if op == "and":
            return bool(self.eval(e.lhs, frame)) and bool(self.eval(e.rhs, frame))
        if op == "or":
            return bool(self.eval(e.lhs, frame)) or bool(self.eval(e.rhs, frame))
        a = self.eval(e.lhs, frame)
        b = self.eval(e.rhs, frame)
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if isinstance(a, str):
            return a + b
        integral = isinstance(a, int)
        if op == "+":
            r = a + b
        elif op == "-":
            r = a - b
        elif op == "*":
            r = a * b
        elif op in ("/", "%"):
            if b == 0:
                raise fail("E_RUNTIME", "division by zero")
            if integral:
                q = abs(a) // abs(b)
                q = q if (a >= 0) == (b >= 0) else -q
                r = q if op == "/" else a - q * b
            else:
                r = a / b if op == "/" else math.fmod(a, b)
        else:
            raise TypeError(f"unexpected operator {op!r}")
        return wrap_int(r) if integral else r

    def call_expr(self, e: A.Call, frame: dict):
        args = [self.eval(a, frame) for a in e.args]
        sid = self.table.refs.get(id(e))
        if sid is not None:
            return self.call(self.table.symbols[sid].decl, args)
        return self.builtin(e.callee, args)

    def builtin(self, name: str, args: list):
        m = self.machine
        kind = BUILTINS[name].kind
        if kind == "gate":
            if name in CONTROLLED_FORMS:
                k, g = CONTROLLED_FORMS[name]
                m.gate(g, args[:k], args[k])
            else:
                m.gate(name, (), args[0])
            return None
        if name == "M":
            return Result(m.measure([args[0]]))
        if name == "MultiM":
            qs = list(args[0])
            o = m.measure(qs) if qs else 0
            return tuple(Result((o >> r) & 1) for r in range(len(qs)))
        if name == "Reset":
            m.reset(args[0])
            return None
        if name == "Message":
            if m.unitary_mode:
                raise fail("E_PRECONDITION", "Message in a callable analysed as a unitary")
            self.trace.append(args[0])
            return None
        if name == "ApplyToEach":
            ref, qs = args
            for q in qs:
                if ref.decl is not None:
                    self.call(ref.decl, [q])
                else:
                    self.builtin(ref.name, [q])
            return None
        if name == "ResultArrayAsInt":
            return wrap_int(sum(r.value << i for i, r in enumerate(args[0])))
        raise TypeError(f"unexpected builtin {name!r}")
