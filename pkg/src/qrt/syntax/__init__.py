"""Lexing, parsing and canonical printing of the Q# subset."""

from . import ast
from .ast import ast_equal
from .builtins import BUILTINS, GATES
from .diagnostics import Diagnostic, DiagnosticError, ParseError, SourceSpan
from .parser import parse, parse_expr
from .printer import print_program, to_source

# ``print`` is the public name of the printer operation; the alias keeps the
# builtin available inside this package.
print = print_program  # noqa: A001

__all__ = [
    "ast", "ast_equal", "BUILTINS", "GATES", "Diagnostic", "DiagnosticError", "ParseError",
    "SourceSpan", "parse", "parse_expr", "print", "print_program", "to_source",
]
