"""Name resolution, safety checks, statement indexing and dependence graphs."""

from .duplicates import find_duplicates
from .index import StatementIndex, format_path, index_statements, parse_path, parse_range
from .pdg import Pdg, PdgEdge, build_pdg
from .safety import check_quantum_safety
from .symbols import ResolveError, Symbol, SymbolTable, analyze, resolve
from .unused import entry_points, find_unused

__all__ = [
    "Pdg", "PdgEdge", "ResolveError", "StatementIndex", "Symbol", "SymbolTable", "analyze",
    "build_pdg", "check_quantum_safety", "entry_points", "find_duplicates", "find_unused",
    "format_path", "index_statements", "parse_path", "parse_range", "resolve",
]
