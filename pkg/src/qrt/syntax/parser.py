"""Recursive-descent parser producing :mod:`qrt.syntax.ast` trees."""

from __future__ import annotations

from . import ast as A
from .builtins import CONTROLLABLE_GATES
from .diagnostics import Diagnostic, ParseError, span_between
from .lexer import UNSUPPORTED_KEYWORDS, SourceMap, Token, check_delimiters, tokenize

MAX_DEPTH = 64

_EQ_OPS = ("==", "!=")
_REL_OPS = ("<", "<=", ">", ">=")
_ADD_OPS = ("+", "-")
_MUL_OPS = ("*", "/", "%")


def _describe(tok: Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind == "IDENT":
        return f"identifier {tok.text!r}"
    if tok.kind in ("INT", "DOUBLE"):
        return f"number {tok.text}"
    if tok.kind in ("STRING", "INTERP"):
        return "string literal"
    if tok.kind == "KEYWORD":
        return f"keyword {tok.text!r}"
    return repr(tok.text)


class Parser:
    def __init__(self, smap: SourceMap, tokens: list[Token]) -> None:
        self.smap = smap
        self.toks = tokens
        self.i = 0
        self.depth = 0

    # ------------------------------------------------------------ utilities

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def at(self, *texts: str) -> bool:
        tok = self.tok
        return tok.kind in ("PUNCT", "KEYWORD") and tok.text in texts

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.advance()
        return None

    def error(self, expected: list[str], tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        if tok.kind == "IDENT" and tok.text in UNSUPPORTED_KEYWORDS:
            return self.unsupported(tok, f"{tok.text!r} is outside the supported Q# subset")
        want = ", ".join(expected)
        return ParseError([Diagnostic(
            "E_SYNTAX",
            f"expected {want}; found {_describe(tok)}",
            self.smap.span(tok.start, tok.end),
        )])

    def unsupported(self, tok: Token, message: str) -> ParseError:
        return ParseError([Diagnostic("E_UNSUPPORTED", message, self.smap.span(tok.start, tok.end))])

    def expect(self, text: str) -> Token:
        if self.at(text):
            return self.advance()
        raise self.error([repr(text)])

    def ident(self) -> Token:
        if self.tok.kind == "IDENT":
            if self.tok.text in UNSUPPORTED_KEYWORDS:
                raise self.error(["identifier"])
            return self.advance()
        raise self.error(["identifier"])

    def span_from(self, start: Token):
        prev = self.toks[self.i - 1] if self.i > 0 else start
        return self.smap.span(start.start, max(prev.end, start.end))

    def enter(self) -> None:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ParseError([Diagnostic(
                "E_SYNTAX", f"nesting deeper than {MAX_DEPTH} levels",
                self.smap.span(self.tok.start, self.tok.end),
            )])

    def leave(self) -> None:
        self.depth -= 1

    # ---------------------------------------------------------- top level

    def program(self) -> A.Program:
        namespaces = []
        while self.tok.kind != "EOF":
            namespaces.append(self.namespace())
        return A.Program(tuple(namespaces), self.smap.file, self.tok.comments)

    def dotted(self) -> str:
        parts = [self.ident().text]
        while self.at(".") and self.peek().kind == "IDENT":
            self.advance()
            parts.append(self.ident().text)
        return ".".join(parts)

    def namespace(self) -> A.Namespace:
        start = self.tok
        if not self.at("namespace"):
            raise self.error(["'namespace'"])
        self.advance()
        name = self.dotted()
        self.expect("{")
        opens = []
        while self.at("open"):
            self.advance()
            opens.append(self.dotted())
            self.expect(";")
        callables = []
        while self.at("operation", "function"):
            callables.append(self.callable())
        if not self.at("}"):
            if self.tok.kind == "PUNCT" and self.tok.text == "@":
                raise self.unsupported(self.tok, "attributes are not supported")
            raise self.error(["'operation'", "'function'", "'}'"])
        trailing = self.tok.comments
        self.advance()
        return A.Namespace(name, tuple(opens), tuple(callables), self.span_from(start),
                           start.comments, trailing)

    def callable(self) -> A.Callable:
        start = self.advance()
        name_tok = self.ident()
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.param())
            while self.accept(","):
                params.append(self.param())
        self.expect(")")
        self.expect(":")
        ret = self.type_()
        if self.tok.kind == "IDENT" and self.tok.text == "is":
            raise self.unsupported(self.tok, "functor characteristics are not supported")
        body = self.block()
        return A.Callable(start.text, name_tok.text, tuple(params), ret, body,
                          self.span_from(start), self.smap.span(name_tok.start, name_tok.end),
                          start.comments)

    def param(self) -> A.Param:
        tok = self.ident()
        self.expect(":")
        t = self.type_()
        return A.Param(tok.text, t, self.span_from(tok))

    def type_(self) -> A.Type:
        tok = self.tok
        if self.at("("):
            raise self.unsupported(tok, "tuple types are not supported")
        if tok.kind != "IDENT":
            raise self.error(["type"])
        self.advance()
        if tok.text not in A.SCALAR_TYPES:
            raise ParseError([Diagnostic("E_UNKNOWN_TYPE", f"unknown type {tok.text!r}",
                                         self.smap.span(tok.start, tok.end))])
        t = A.Type(tok.text)
        while self.at("[") and self.peek().kind == "PUNCT" and self.peek().text == "]":
            if t.name == "Unit":
                raise self.error(["element type other than Unit"], tok)
            self.advance()
            self.advance()
            t = A.array_of(t)
        return t

    # ---------------------------------------------------------- statements

    def block(self) -> A.Block:
        start = self.expect("{")
        self.enter()
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "EOF":
                raise self.error(["'}'"])
            stmts.append(self.statement())
        trailing = self.tok.comments
        self.advance()
        self.leave()
        return A.Block(tuple(stmts), self.span_from(start), trailing)

    def statement(self):
        tok = self.tok
        comments = tok.comments
        if tok.kind == "IDENT" and tok.text in UNSUPPORTED_KEYWORDS and not self.peek().text == "(":
            raise self.unsupported(tok, f"{tok.text!r} statements are outside the supported Q# subset")
        if self.at("let", "mutable", "set"):
            kw = self.advance()
            name_tok = self.ident()
            self.expect("=")
            value = self.expr()
            self.expect(";")
            cls = {"let": A.Let, "mutable": A.Mutable, "set": A.Set}[kw.text]
            return cls(name_tok.text, value, self.span_from(tok),
                       self.smap.span(name_tok.start, name_tok.end), comments)
        if self.at("using"):
            self.advance()
            self.expect("(")
            name_tok = self.ident()
            self.expect("=")
            q = self.tok
            if not (q.kind == "IDENT" and q.text == "Qubit"):
                if q.kind == "PUNCT" and q.text == "(":
                    raise self.unsupported(q, "tuple qubit allocation is not supported")
                raise self.error(["'Qubit'"])
            self.advance()
            if self.accept("("):
                self.expect(")")
                size = None
            else:
                self.expect("[")
                size = self.expr()
                self.expect("]")
            self.expect(")")
            body = self.block()
            return A.Using(name_tok.text, size, body, self.span_from(tok),
                           self.smap.span(name_tok.start, name_tok.end), comments)
        if self.at("for"):
            self.advance()
            self.expect("(")
            var_tok = self.ident()
            self.expect("in")
            rng = self.expr()
            self.expect(")")
            body = self.block()
            return A.For(var_tok.text, rng, body, self.span_from(tok),
                         self.smap.span(var_tok.start, var_tok.end), comments)
        if self.at("if"):
            self.advance()
            cond = self.paren_cond()
            then = self.block()
            elifs = []
            else_ = None
            while self.at("elif"):
                et = self.advance()
                c = self.paren_cond()
                b = self.block()
                elifs.append(A.Elif(c, b, self.span_from(et)))
            if self.accept("else"):
                else_ = self.block()
            return A.If(cond, then, tuple(elifs), else_, self.span_from(tok), comments)
        if self.at("return"):
            self.advance()
            value = self.expr()
            self.expect(";")
            return A.Return(value, self.span_from(tok), comments)
        if self.at("elif", "else"):
            raise self.error(["statement"])
        expr = self.expr()
        if not isinstance(expr, (A.Call, A.ControlledApply)):
            raise ParseError([Diagnostic("E_SYNTAX", "only calls may be used as statements",
                                         self.span_from(tok))])
        self.expect(";")
        return A.CallStmt(expr, self.span_from(tok), comments)

    def paren_cond(self):
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        return cond

    # --------------------------------------------------------- expressions

    def expr(self):
        self.enter()
        start = self.tok
        lo = self.or_expr()
        if self.accept(".."):
            hi = self.or_expr()
            lo = A.RangeExpr(lo, hi, self.span_from(start))
        self.leave()
        return lo

    def _binary(self, ops, sub):
        start = self.tok
        lhs = sub()
        while self.at(*ops):
            op = self.advance().text
            rhs = sub()
            lhs = A.Binary(op, lhs, rhs, self.span_from(start))
        return lhs

    def or_expr(self):
        return self._binary(("or",), self.and_expr)

    def and_expr(self):
        return self._binary(("and",), self.eq_expr)

    def eq_expr(self):
        return self._binary(_EQ_OPS, self.rel_expr)

    def rel_expr(self):
        return self._binary(_REL_OPS, self.add_expr)

    def add_expr(self):
        return self._binary(_ADD_OPS, self.mul_expr)

    def mul_expr(self):
        return self._binary(_MUL_OPS, self.unary)

    def unary(self):
        start = self.tok
        if self.at("-", "not"):
            self.enter()
            op = self.advance().text
            operand = self.unary()
            self.leave()
            return A.Unary(op, operand, self.span_from(start))
        return self.postfix()

    def postfix(self):
        start = self.tok
        e = self.primary()
        while True:
            if self.at("["):
                self.advance()
                idx = self.expr()
                self.expect("]")
                span = self.span_from(start)
                e = A.Slice(e, idx, span) if isinstance(idx, A.RangeExpr) else A.Index(e, idx, span)
            elif self.at("("):
                if not isinstance(e, A.Ident):
                    raise self.error(["operator", "';'"])
                args = self.args()
                e = A.Call(e.name, args, self.span_from(start), e.span)
            else:
                return e

    def args(self) -> tuple:
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.expr())
            while self.accept(","):
                out.append(self.expr())
        self.expect(")")
        return tuple(out)

    def primary(self):
        tok = self.tok
        span = self.smap.span(tok.start, tok.end)
        if tok.kind == "INT":
            self.advance()
            return A.IntLit(tok.value, span)
        if tok.kind == "DOUBLE":
            self.advance()
            return A.DoubleLit(tok.value, span)
        if tok.kind == "STRING":
            self.advance()
            return A.StringLit(tok.value, span)
        if tok.kind == "INTERP":
            self.advance()
            return A.InterpString(self.interp_parts(tok), span)
        if tok.kind == "IDENT":
            if tok.text in UNSUPPORTED_KEYWORDS:
                raise self.unsupported(tok, f"{tok.text!r} is outside the supported Q# subset")
            self.advance()
            return A.Ident(tok.text, span)
        if self.at("true", "false"):
            self.advance()
            return A.BoolLit(tok.text == "true", span)
        if self.at("Zero", "One"):
            self.advance()
            return A.ResultLit(tok.text, span)
        if self.at("("):
            self.advance()
            e = self.expr()
            if self.at(","):
                raise self.unsupported(self.tok, "tuples are not supported")
            self.expect(")")
            return e
        if self.at("["):
            self.advance()
            self.enter()
            items = []
            if not self.at("]"):
                items.append(self.expr())
                while self.accept(","):
                    items.append(self.expr())
            self.expect("]")
            self.leave()
            return A.ArrayLit(tuple(items), self.span_from(tok))
        if self.at("Controlled"):
            self.advance()
            gate_tok = self.tok
            if gate_tok.kind != "IDENT":
                raise self.error(["gate name"])
            if gate_tok.text not in CONTROLLABLE_GATES:
                raise self.unsupported(gate_tok, f"Controlled {gate_tok.text} is not supported")
            self.advance()
            args = self.args()
            if len(args) < 2:
                raise ParseError([Diagnostic("E_SYNTAX", "Controlled application needs controls and a target",
                                             self.span_from(tok))])
            return A.ControlledApply(gate_tok.text, args[0], args[1:], self.span_from(tok),
                                     self.smap.span(gate_tok.start, gate_tok.end))
        raise self.error(["expression"])

    def interp_parts(self, tok: Token) -> tuple:
        parts: list = []
        for part in tok.value:
            if part[0] == "lit":
                parts.append(part[1])
                continue
            _, start, end = part
            sub_tokens = tokenize(self.smap, start, end)
            check_delimiters(sub_tokens, self.smap)
            sub = Parser(self.smap, sub_tokens)
            sub.depth = self.depth
            e = sub.expr()
            if sub.tok.kind != "EOF":
                raise sub.error(["'}'"])
            parts.append(e)
        return tuple(parts)


def parse(source: str | bytes, file: str = "<input>") -> A.Program:
    """Parse Q# source text; raises :class:`ParseError` with diagnostics on failure."""
    if isinstance(source, (bytes, bytearray)):
        try:
            source = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            smap = SourceMap("", file)
            raise ParseError([Diagnostic("E_SYNTAX", f"input is not valid UTF-8 (byte {exc.start})",
                                         smap.span(0, 0))]) from None
    smap = SourceMap(source, file)
    try:
        tokens = tokenize(smap)
        check_delimiters(tokens, smap)
        return Parser(smap, tokens).program()
    except RecursionError:
        raise ParseError([Diagnostic("E_SYNTAX", "input nests too deeply", smap.span(0, 0))]) from None


def parse_expr(source: str, file: str = "<expr>"):
    """Parse a standalone expression (used for CLI arguments such as default values)."""
    smap = SourceMap(source, file)
    tokens = tokenize(smap)
    check_delimiters(tokens, smap)
    p = Parser(smap, tokens)
    e = p.expr()
    if p.tok.kind != "EOF":
        raise p.error(["end of expression"])
    return e


def parse_type(source: str, file: str = "<type>") -> A.Type:
    """Parse a type such as ``Int`` or ``Result[]``."""
    smap = SourceMap(source, file)
    p = Parser(smap, tokenize(smap))
    t = p.type_()
    if p.tok.kind != "EOF":
        raise p.error(["end of type"])
    return t


__all__ = ["parse", "parse_expr", "parse_type", "Parser", "span_between"]
