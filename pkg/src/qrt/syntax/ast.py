"""Immutable syntax tree for the supported Q# subset.

Spans and comments are carried on nodes but excluded from equality, so ``==``
on two trees is structural comparison.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable as Fn, Iterator, Union

from .diagnostics import NO_SPAN, SourceSpan


def _span() -> SourceSpan:
    return field(default=NO_SPAN, compare=False, repr=False)


def _comments():
    return field(default=(), compare=False, repr=False)


class Node:
    """Mixin giving every tree node generic child traversal."""

    __slots__ = ()

    def children(self) -> Iterator["Node"]:
        for f in dataclasses.fields(self):
            if not f.compare:
                continue
            value = getattr(self, f.name)
            if isinstance(value, Node):
                yield value
            elif isinstance(value, tuple):
                for item in value:
                    if isinstance(item, Node):
                        yield item

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.children():
            yield from child.walk()

    def map_children(self, fn: Fn[["Node"], "Node"]) -> "Node":
        """Rebuild this node with ``fn`` applied to every direct child node."""
        changes = {}
        for f in dataclasses.fields(self):
            if not f.compare:
                continue
            value = getattr(self, f.name)
            if isinstance(value, Node):
                changes[f.name] = fn(value)
            elif isinstance(value, tuple) and any(isinstance(v, Node) for v in value):
                changes[f.name] = tuple(fn(v) if isinstance(v, Node) else v for v in value)
        return dataclasses.replace(self, **changes) if changes else dataclasses.replace(self)


# --------------------------------------------------------------------- types


@dataclass(frozen=True)
class Type(Node):
    name: str
    elem: "Type | None" = None

    def __str__(self) -> str:
        if self.name == "Array":
            return f"{self.elem}[]"
        return self.name

    @property
    def is_array(self) -> bool:
        return self.name == "Array"

    @property
    def is_quantum(self) -> bool:
        t = self
        while t.name == "Array":
            t = t.elem
        return t.name == "Qubit"


SCALAR_TYPES = ("Unit", "Int", "Double", "Bool", "String", "Result", "Range", "Qubit")

UNIT = Type("Unit")
INT = Type("Int")
DOUBLE = Type("Double")
BOOL = Type("Bool")
STRING = Type("String")
RESULT = Type("Result")
RANGE = Type("Range")
QUBIT = Type("Qubit")


def array_of(t: Type) -> Type:
    return Type("Array", t)


QUBIT_ARRAY = array_of(QUBIT)
RESULT_ARRAY = array_of(RESULT)

# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class IntLit(Node):
    value: int
    span: SourceSpan = _span()


@dataclass(frozen=True)
class DoubleLit(Node):
    value: float
    span: SourceSpan = _span()


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool
    span: SourceSpan = _span()


@dataclass(frozen=True)
class StringLit(Node):
    value: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ResultLit(Node):
    value: str  # "Zero" | "One"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class InterpString(Node):
    parts: tuple  # alternating str literals and Expr nodes
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Ident(Node):
    name: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ArrayLit(Node):
    items: tuple
    span: SourceSpan = _span()


@dataclass(frozen=True)
class RangeExpr(Node):
    lo: "Expr"
    hi: "Expr"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Index(Node):
    base: "Expr"
    index: "Expr"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Slice(Node):
    base: "Expr"
    range: RangeExpr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Binary(Node):
    op: str
    lhs: "Expr"
    rhs: "Expr"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Unary(Node):
    op: str  # "-" | "not"
    operand: "Expr"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Call(Node):
    callee: str
    args: tuple
    span: SourceSpan = _span()
    callee_span: SourceSpan = _span()


@dataclass(frozen=True)
class ControlledApply(Node):
    gate: str
    controls: "Expr"
    args: tuple
    span: SourceSpan = _span()
    gate_span: SourceSpan = _span()


Expr = Union[
    IntLit, DoubleLit, BoolLit, StringLit, ResultLit, InterpString, Ident, ArrayLit,
    RangeExpr, Index, Slice, Binary, Unary, Call, ControlledApply,
]
LITERALS = (IntLit, DoubleLit, BoolLit, StringLit, ResultLit)

# ----------------------------------------------------------------- statements


@dataclass(frozen=True)
class Block(Node):
    stmts: tuple
    span: SourceSpan = _span()
    trailing: tuple = _comments()


@dataclass(frozen=True)
class Let(Node):
    name: str
    value: Expr
    span: SourceSpan = _span()
    name_span: SourceSpan = _span()
    comments: tuple = _comments()


@dataclass(frozen=True)
class Mutable(Node):
    name: str
    value: Expr
    span: SourceSpan = _span()
    name_span: SourceSpan = _span()
    comments: tuple = _comments()


@dataclass(frozen=True)
class Set(Node):
    name: str
    value: Expr
    span: SourceSpan = _span()
    name_span: SourceSpan = _span()
    comments: tuple = _comments()


@dataclass(frozen=True)
class Using(Node):
    name: str
    size: "Expr | None"  # None allocates a single qubit
    body: Block
    span: SourceSpan = _span()
    name_span: SourceSpan = _span()
    comments: tuple = _comments()


@dataclass(frozen=True)
class For(Node):
    var: str
    range: Expr
    body: Block
    span: SourceSpan = _span()
    var_span: SourceSpan = _span()
    comments: tuple = _comments()


@dataclass(frozen=True)
class Elif(Node):
    cond: Expr
    body: Block
    span: SourceSpan = _span()


@dataclass(frozen=True)
class If(Node):
    cond: Expr
    then: Block
    elifs: tuple = ()
    else_: "Block | None" = None
    span: SourceSpan = _span()
    comments: tuple = _comments()

    def blocks(self) -> list[Block]:
        out = [self.then, *(e.body for e in self.elifs)]
        if self.else_ is not None:
            out.append(self.else_)
        return out


@dataclass(frozen=True)
class Return(Node):
    value: Expr
    span: SourceSpan = _span()
    comments: tuple = _comments()


@dataclass(frozen=True)
class CallStmt(Node):
    expr: Expr  # Call or ControlledApply
    span: SourceSpan = _span()
    comments: tuple = _comments()


Stmt = Union[Let, Mutable, Set, Using, For, If, Return, CallStmt]
STATEMENTS = (Let, Mutable, Set, Using, For, If, Return, CallStmt)

# ------------------------------------------------------------------ top level


@dataclass(frozen=True)
class Param(Node):
    name: str
    type: Type
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Callable(Node):
    kind: str  # "operation" | "function"
    name: str
    params: tuple
    return_type: Type
    body: Block
    span: SourceSpan = _span()
    name_span: SourceSpan = _span()
    comments: tuple = _comments()

    @property
    def is_operation(self) -> bool:
        return self.kind == "operation"


@dataclass(frozen=True)
class Namespace(Node):
    name: str
    opens: tuple
    callables: tuple
    span: SourceSpan = _span()
    comments: tuple = _comments()
    trailing: tuple = _comments()

    def find(self, name: str) -> "Callable | None":
        for c in self.callables:
            if c.name == name:
                return c
        return None


@dataclass(frozen=True)
class Program(Node):
    namespaces: tuple
    file: str = field(default="<input>", compare=False)
    trailing: tuple = _comments()

    def namespace(self, name: str) -> "Namespace | None":
        for ns in self.namespaces:
            if ns.name == name:
                return ns
        return None

    def callables(self) -> Iterator[tuple[Namespace, Callable]]:
        for ns in self.namespaces:
            for c in ns.callables:
                yield ns, c


# ------------------------------------------------------------------- helpers


def child_blocks(stmt: Node) -> list[Block]:
    """Blocks directly nested in a statement, in source order."""
    if isinstance(stmt, (Using, For)):
        return [stmt.body]
    if isinstance(stmt, If):
        return stmt.blocks()
    return []


def child_statements(stmt: Node) -> list:
    """Direct child statements of a compound statement (If blocks concatenated)."""
    out: list = []
    for b in child_blocks(stmt):
        out.extend(b.stmts)
    return out


def transform(node: Node, fn: Fn[[Node], "Node | None"]) -> Node:
    """Bottom-up rewrite; ``fn`` returns a replacement or None to keep the node.

    Every node on the way up is rebuilt, so the result never shares objects
    with the input.
    """
    rebuilt = node.map_children(lambda c: transform(c, fn))
    out = fn(rebuilt)
    return rebuilt if out is None else out


def unshare(node: Node) -> Node:
    return transform(node, lambda n: None)


def ast_equal(a: Node, b: Node) -> bool:
    """Structural equality ignoring spans and comments."""
    return a == b


def with_body(stmt: Node, body: Block) -> Node:
    return dataclasses.replace(stmt, body=body)


def replace_node(node, **changes):
    return dataclasses.replace(node, **changes)
