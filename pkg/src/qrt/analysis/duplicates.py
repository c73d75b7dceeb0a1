"""Clone detection over statement sequences of one callable."""

from __future__ import annotations

from ..syntax import ast as A
from .index import Path, iter_statements
from .rewrite import declared_in, rename_symbols
from .symbols import SymbolTable

DEFAULT_MIN_LEN = 3


def canonical(stmts, table: SymbolTable) -> tuple:
    """Statements with every locally declared name replaced by ``$k``.

    Two sequences are clones iff their canonical forms are equal; names
    declared outside the sequence must match literally.
    """
    mapping = {sid: f"${k}" for k, sid in enumerate(declared_in(stmts, table))}
    return tuple(rename_symbols(s, table, mapping) for s in stmts)


def _blocks(c: A.Callable):
    """Every block of the callable with the path of each statement in it."""
    blocks: dict[tuple, list] = {(): []}
    order = [()]
    for ref in iter_statements(c.body):
        key = ref.block_key
        if key not in blocks:
            blocks[key] = []
            order.append(key)
        blocks[key].append(ref)
    return [blocks[k] for k in order if blocks[k]]


def _is_prefix(prefix: Path, path: Path) -> bool:
    return len(prefix) < len(path) and path[:len(prefix)] == prefix


def find_duplicates(c: A.Callable, table: SymbolTable, min_len: int = DEFAULT_MIN_LEN):
    """Maximal non-overlapping clone pairs as ``(path_a, path_b, length)``."""
    if min_len < 2:
        raise ValueError("min_len must be at least 2")
    blocks = _blocks(c)
    cache: dict[tuple, tuple] = {}

    def canon(bi: int, i: int, n: int):
        key = (bi, i, n)
        if key not in cache:
            cache[key] = canonical([r.stmt for r in blocks[bi][i:i + n]], table)
        return cache[key]

    def cap(bx: int, i: int, by: int, j: int) -> int:
        xs, ys = blocks[bx], blocks[by]
        limit = min(len(xs) - i, len(ys) - j)
        if bx == by:
            limit = min(limit, j - i)
        else:
            # a sequence may not contain the statement that encloses the other one
            for k in range(i, i + limit):
                if _is_prefix(xs[k].path, ys[j].path):
                    limit = k - i
                    break
            for k in range(j, j + limit):
                if _is_prefix(ys[k].path, xs[i].path):
                    limit = min(limit, k - j)
                    break
        return max(limit, 0)

    def length(bx: int, i: int, by: int, j: int) -> int:
        best = 0
        for n in range(1, cap(bx, i, by, j) + 1):
            if canon(bx, i, n) != canon(by, j, n):
                break
            best = n
        return best

    starts = [(bi, i) for bi, b in enumerate(blocks) for i in range(len(b))]
    starts.sort(key=lambda t: blocks[t[0]][t[1]].path)
    found = []
    for ai, (bx, i) in enumerate(starts):
        for by, j in starts[ai + 1:]:
            n = length(bx, i, by, j)
            if n < min_len:
                continue
            if i > 0 and j > 0 and length(bx, i - 1, by, j - 1) >= n + 1:
                continue
            found.append((blocks[bx][i].path, blocks[by][j].path, n))
    return found
