"""Recursive-descent parser for flux/entropy expressions.

Grammar (EBNF)::

    expr    = term , { ("+" | "-") , term } ;
    term    = power , { ("*" | "/") , power } ;
    power   = unary , [ "^" , power ] ;            (* right-associative *)
    unary   = ( "-" | "+" ) , unary | primary ;
    primary = NUMBER | IDENT | FUNC , "(" , expr , ")" | "(" , expr , ")" ;
    FUNC    = "exp" | "log" | "sqrt" ;

Unary signs bind tighter than ``^`` (``-u1^2`` is ``(-u1)^2``).  Exponents
may not reference state variables.  ``u1 .. un`` are state variables; other
identifiers are aliases of state variables or parameters.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from ..model import ShockAuditError
from .ast import FUNCTIONS, Binary, Const, Expr, Param, Pow, Unary, Var, variables


class ParseError(ShockAuditError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)
_VAR = re.compile(r"u([1-9][0-9]*)$")


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    pos: int


def tokenize(source: str) -> list:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            line, col = _location(source, pos)
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


def _location(source: str, pos: int) -> tuple:
    line = source.count("\n", 0, pos) + 1
    col = pos - (source.rfind("\n", 0, pos) + 1) + 1
    return line, col


class _Parser:
    def __init__(self, source: str, n: Optional[int], aliases: Mapping[str, int],
                 params: Optional[frozenset]):
        self.source = source
        self.tokens = tokenize(source)
        self.i = 0
        self.n = n
        self.aliases = dict(aliases)
        self.params = params

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, *_location(self.source, tok.pos))

    def take(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind != "op":
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.take()

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.power()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.take().text
            node = Binary(op, node, self.power())
        return node

    def power(self) -> Expr:
        base = self.unary()
        if self.tok.kind == "op" and self.tok.text == "^":
            caret = self.take()
            exponent = self.power()
            if variables(exponent):
                raise self.error("exponent must not depend on state variables", caret)
            return Pow(base, exponent)
        return base

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.take()
            return Unary("neg", self.unary())
        if self.tok.kind == "op" and self.tok.text == "+":
            self.take()
            return self.unary()
        return self.primary()

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.take()
            return Const(float(tok.text))
        if tok.kind == "op" and tok.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            self.take()
            return self.identifier(tok)
        raise self.error(f"unexpected {tok.text or 'end of input'!r}", tok)

    def identifier(self, tok: Token) -> Expr:
        name = tok.text
        if name in FUNCTIONS and self.tok.text == "(":
            self.take()
            arg = self.expr()
            self.expect(")")
            return Unary(name, arg)
        m = _VAR.match(name)
        if m:
            index = int(m.group(1))
            if self.n is not None and index > self.n:
                raise self.error(f"unknown identifier {name!r} (system has {self.n} variables)", tok)
            return Var(index)
        if name in self.aliases:
            return Var(self.aliases[name])
        if self.params is None or name in self.params:
            return Param(name)
        raise self.error(f"unknown identifier {name!r}", tok)


def parse(source: str, n: Optional[int] = None, aliases: Optional[Mapping[str, int]] = None,
          parameters: Optional[Iterable[str]] = None) -> Expr:
    """Parse ``source`` into an expression tree.

    ``aliases`` maps names to 1-based variable indices.  If ``parameters``
    is given, any other identifier is an error; otherwise it becomes a
    parameter to be bound at evaluation time.
    """
    params = None if parameters is None else frozenset(parameters)
    return _Parser(source, n, aliases or {}, params).parse()
