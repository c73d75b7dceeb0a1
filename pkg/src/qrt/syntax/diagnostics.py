"""Source spans and diagnostics shared by every stage of the pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start: int
    end: int
    line: int
    col: int
    end_line: int
    end_col: int

    def to_dict(self) -> dict:
        return {
            "file": self.file,
            "line": self.line,
            "col": self.col,
            "endLine": self.end_line,
            "endCol": self.end_col,
        }


NO_SPAN = SourceSpan("<synthetic>", 0, 0, 1, 1, 1, 1)


def span_between(a: SourceSpan, b: SourceSpan) -> SourceSpan:
    return SourceSpan(a.file, a.start, b.end, a.line, a.col, b.end_line, b.end_col)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: SourceSpan = NO_SPAN
    severity: str = "error"

    def format(self) -> str:
        return (
            f"{self.span.file}:{self.span.line}:{self.span.col}: "
            f"{self.severity}[{self.code}]: {self.message}"
        )

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "span": self.span.to_dict(),
            "message": self.message,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    __str__ = format


@dataclass
class DiagnosticError(Exception):
    """Raised when a stage cannot produce a result; carries >= 1 diagnostic."""

    diagnostics: list[Diagnostic] = field(default_factory=list)

    def __post_init__(self) -> None:
        super().__init__(self.diagnostics)

    def __str__(self) -> str:
        return "\n".join(d.format() for d in self.diagnostics)

    @property
    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]


class ParseError(DiagnosticError):
    pass
