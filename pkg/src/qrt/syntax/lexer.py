"""Tokenizer for the Q# subset."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

from .diagnostics import Diagnostic, ParseError, SourceSpan

KEYWORDS = frozenset({
    "namespace", "open", "operation", "function", "let", "mutable", "set", "using",
    "for", "in", "if", "elif", "else", "return", "true", "false", "and", "or", "not",
    "Controlled", "Zero", "One",
})

# Recognised Q# keywords outside the supported subset.
UNSUPPORTED_KEYWORDS = frozenset({
    "use", "borrow", "borrowing", "repeat", "until", "fixup", "within", "apply",
    "while", "newtype", "Adjoint", "fail", "is", "Adj", "Ctl", "adjoint", "controlled",
    "body", "auto", "self", "invert", "distribute", "intrinsic", "internal", "import",
    "export", "struct", "new", "xor",
})

_PUNCT = [
    "..", "==", "!=", "<=", ">=", "{", "}", "(", ")", "[", "]", ";", ",", ":", "=",
    "+", "-", "*", "/", "%", "<", ">", ".",
]
_OPENERS = {"{": "}", "(": ")", "[": "]"}
_CLOSERS = {v: k for k, v in _OPENERS.items()}
_MAX_INT = 2**63 - 1

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}
_INTERP_ESCAPES = {**_ESCAPES, "{": "{", "}": "}"}


@dataclass
class Token:
    kind: str  # IDENT KEYWORD INT DOUBLE STRING INTERP PUNCT EOF
    text: str
    start: int
    end: int
    value: object = None
    comments: tuple = field(default=())


class SourceMap:
    """Offset -> (line, column) translation; lines split on LF only."""

    def __init__(self, text: str, file: str) -> None:
        self.text = text
        self.file = file
        self._starts = [0]
        pos = text.find("\n")
        while pos != -1:
            self._starts.append(pos + 1)
            pos = text.find("\n", pos + 1)

    def position(self, offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(self._starts, offset)
        return line, offset - self._starts[line - 1] + 1

    def span(self, start: int, end: int) -> SourceSpan:
        line, col = self.position(start)
        end_line, end_col = self.position(end)
        return SourceSpan(self.file, start, end, line, col, end_line, end_col)

    def error(self, code: str, message: str, start: int, end: int | None = None) -> ParseError:
        end = start if end is None else end
        return ParseError([Diagnostic(code, message, self.span(start, end))])


def _is_ident_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch == "_")


def _is_ident_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch == "_")


class Lexer:
    def __init__(self, smap: SourceMap, start: int = 0, end: int | None = None) -> None:
        self.smap = smap
        self.src = smap.text
        self.pos = start
        self.end = len(self.src) if end is None else end

    def tokenize(self) -> list[Token]:
        tokens: list[Token] = []
        pending: list[str] = []
        src, end = self.src, self.end
        while True:
            self._skip_space()
            if self.pos >= end:
                tokens.append(Token("EOF", "", end, end, comments=tuple(pending)))
                return tokens
            ch = src[self.pos]
            if src.startswith("//", self.pos):
                nl = src.find("\n", self.pos, end)
                stop = end if nl == -1 else nl
                pending.append(src[self.pos + 2:stop].rstrip("\r"))
                self.pos = stop
                continue
            tok = self._next(ch)
            if pending:
                tok.comments = tuple(pending)
                pending = []
            tokens.append(tok)

    def _skip_space(self) -> None:
        src, end = self.src, self.end
        while self.pos < end and src[self.pos] in " \t\r\n\f\v\ufeff":
            self.pos += 1

    def _next(self, ch: str) -> Token:
        src, start = self.src, self.pos
        if _is_ident_start(ch):
            pos = start + 1
            while pos < self.end and _is_ident_char(src[pos]):
                pos += 1
            self.pos = pos
            text = src[start:pos]
            return Token("KEYWORD" if text in KEYWORDS else "IDENT", text, start, pos)
        if ch.isascii() and ch.isdigit():
            return self._number()
        if ch == '"':
            value = self._string_body(start + 1, _ESCAPES, interp=False)
            return Token("STRING", src[start:self.pos], start, self.pos, value)
        if ch == "$" and src.startswith('$"', start):
            parts = self._string_body(start + 2, _INTERP_ESCAPES, interp=True)
            return Token("INTERP", src[start:self.pos], start, self.pos, parts)
        for p in _PUNCT:
            if src.startswith(p, start):
                self.pos = start + len(p)
                return Token("PUNCT", p, start, self.pos)
        raise self.smap.error("E_SYNTAX", f"unexpected character {ch!r}", start, start + 1)

    def _number(self) -> Token:
        src, start, end = self.src, self.pos, self.end
        pos = start
        while pos < end and src[pos].isascii() and src[pos].isdigit():
            pos += 1
        is_double = False
        if pos + 1 < end and src[pos] == "." and src[pos + 1].isascii() and src[pos + 1].isdigit():
            is_double = True
            pos += 1
            while pos < end and src[pos].isascii() and src[pos].isdigit():
                pos += 1
        if pos < end and src[pos] in "eE":
            exp = pos + 1
            if exp < end and src[exp] in "+-":
                exp += 1
            if exp < end and src[exp].isascii() and src[exp].isdigit():
                is_double = True
                pos = exp
                while pos < end and src[pos].isascii() and src[pos].isdigit():
                    pos += 1
        if pos < end and _is_ident_char(src[pos]):
            raise self.smap.error("E_SYNTAX", "malformed numeric literal", start, pos + 1)
        self.pos = pos
        text = src[start:pos]
        if is_double:
            if len(text) > 64 or not math.isfinite(value := float(text)):
                raise self.smap.error("E_SYNTAX", "floating literal out of range", start, pos)
            return Token("DOUBLE", text, start, pos, value)
        if len(text) > 19 or int(text) > _MAX_INT:
            raise self.smap.error("E_SYNTAX", "integer literal out of range", start, pos)
        return Token("INT", text, start, pos, int(text))

    def _string_body(self, pos: int, escapes: dict, interp: bool):
        """Scan a string body starting after the opening quote.

        Returns the decoded text, or for interpolated strings a list of
        ``("lit", text)`` / ``("expr", start, end)`` parts.
        """
        src, end = self.src, self.end
        open_at = pos - (2 if interp else 1)
        parts: list = []
        buf: list[str] = []
        while True:
            if pos >= end:
                raise self.smap.error("E_UNBALANCED", "unterminated string literal", open_at, end)
            ch = src[pos]
            if ch == '"':
                pos += 1
                break
            if ch == "\\":
                if pos + 1 >= end or src[pos + 1] not in escapes:
                    raise self.smap.error("E_SYNTAX", "invalid escape sequence", pos, min(pos + 2, end))
                buf.append(escapes[src[pos + 1]])
                pos += 2
                continue
            if interp and ch == "{":
                close = self._match_brace(pos)
                if buf:
                    parts.append(("lit", "".join(buf)))
                    buf = []
                parts.append(("expr", pos + 1, close))
                pos = close + 1
                continue
            if interp and ch == "}":
                raise self.smap.error("E_UNBALANCED", "unmatched '}' in interpolated string", pos, pos + 1)
            buf.append(ch)
            pos += 1
        self.pos = pos
        if not interp:
            return "".join(buf)
        if buf:
            parts.append(("lit", "".join(buf)))
        return parts

    def _match_brace(self, pos: int) -> int:
        src, end = self.src, self.end
        depth = 0
        i = pos
        while i < end:
            ch = src[i]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return i
            elif ch == '"':
                i += 1
                while i < end and src[i] != '"':
                    i += 2 if src[i] == "\\" else 1
            elif ch == "\n":
                break
            i += 1
        raise self.smap.error("E_UNBALANCED", "unterminated interpolation hole", pos, pos + 1)


def check_delimiters(tokens: list[Token], smap: SourceMap) -> None:
    stack: list[Token] = []
    for tok in tokens:
        if tok.kind != "PUNCT":
            continue
        if tok.text in _OPENERS:
            stack.append(tok)
        elif tok.text in _CLOSERS:
            if not stack:
                raise smap.error("E_UNBALANCED", f"unmatched {tok.text!r}", tok.start, tok.end)
            opener = stack.pop()
            if _OPENERS[opener.text] != tok.text:
                raise smap.error(
                    "E_UNBALANCED",
                    f"{tok.text!r} does not close {opener.text!r} opened at line "
                    f"{smap.position(opener.start)[0]}",
                    tok.start, tok.end,
                )
    if stack:
        opener = stack[-1]
        raise smap.error("E_UNBALANCED", f"unclosed {opener.text!r}", opener.start, opener.end)


def tokenize(smap: SourceMap, start: int = 0, end: int | None = None) -> list[Token]:
    return Lexer(smap, start, end).tokenize()
