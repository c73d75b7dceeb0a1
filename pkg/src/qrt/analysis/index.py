"""Ordinal-path indexing of statements.

A path is the sequence of child positions from the callable body root. The
children of an ``if`` are its then-, elif- and else-blocks concatenated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from ..syntax import ast as A
from ..syntax.diagnostics import SourceSpan

Path = tuple[int, ...]


@dataclass(frozen=True)
class StatementRef:
    path: Path
    stmt: A.Node
    block: A.Block
    position: int  # index within ``block``
    parent: A.Node | None  # enclosing compound statement, None at top level
    block_no: int  # which block of the parent (if-blocks are numbered)

    @property
    def block_key(self) -> tuple:
        return (self.path[:-1], self.block_no)


def iter_statements(body: A.Block, prefix: Path = (), parent=None) -> Iterator[StatementRef]:
    """Preorder walk yielding every statement with its path."""
    blocks = [body] if parent is None else A.child_blocks(parent)
    k = 0
    for block_no, block in enumerate(blocks):
        for pos, s in enumerate(block.stmts):
            path = prefix + (k,)
            yield StatementRef(path, s, block, pos, parent, block_no)
            if A.child_blocks(s):
                yield from iter_statements(None, path, s)
            k += 1


def statement_refs(c: A.Callable) -> list[StatementRef]:
    return list(iter_statements(c.body))


def find_statement(c: A.Callable, path: Path) -> StatementRef:
    for ref in iter_statements(c.body):
        if ref.path == tuple(path):
            return ref
    raise KeyError(f"no statement at path {format_path(path)} in {c.name}")


def format_path(path: Path) -> str:
    return ".".join(str(i) for i in path)


def parse_path(text: str) -> Path:
    text = text.strip().strip("[]")
    parts = [p for p in text.replace(",", ".").split(".") if p.strip()]
    if not parts or not all(p.strip().isdigit() for p in parts):
        raise ValueError(f"bad statement path {text!r}")
    return tuple(int(p) for p in parts)


def parse_range(text: str) -> tuple[Path, Path]:
    """``"1.0..1.3"`` -> ((1, 0), (1, 3)); a single path denotes a one-statement range."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return parse_path(lo), parse_path(hi)
    p = parse_path(text)
    return p, p


@dataclass(frozen=True)
class IndexEntry:
    stmt: A.Node
    span: SourceSpan


class StatementIndex:
    """Map (namespace, callable, path) -> statement for a whole program."""

    def __init__(self, program: A.Program) -> None:
        self.entries: dict[tuple[str, str, Path], IndexEntry] = {}
        for ns, c in program.callables():
            for ref in iter_statements(c.body):
                self.entries[(ns.name, c.name, ref.path)] = IndexEntry(ref.stmt, ref.stmt.span)

    def __getitem__(self, key: tuple[str, str, Path]) -> IndexEntry:
        ns, name, path = key
        return self.entries[(ns, name, tuple(path))]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def paths(self, ns: str, name: str) -> list[Path]:
        return [p for (n, c, p) in self.entries if n == ns and c == name]

    def path_set(self) -> set[tuple[str, str, Path]]:
        return set(self.entries)


def index_statements(program: A.Program) -> StatementIndex:
    return StatementIndex(program)
