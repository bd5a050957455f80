"""Recursive-descent parser for function-spec text.

The grammar is documented in ``docs/grammar.md``. Columns in error messages
are 1-based.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from ..errors import ParseError
from . import ast
from .spec import from_node

_NUMBER = re.compile(r"(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)(i?)")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")

CONSTANTS = {"i": 1j, "pi": math.pi}
CONSTRUCTORS = ("blaschke", "poly")


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, op, end
    value: object
    column: int


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _NUMBER.match(text, pos)
        if m and (ch.isdigit() or ch == "."):
            value = float(m.group(1))
            tokens.append(Token("num", complex(0, value) if m.group(2) else complex(value), pos + 1))
            pos = m.end()
            continue
        m = _IDENT.match(text, pos)
        if m:
            tokens.append(Token("ident", m.group(0), pos + 1))
            pos = m.end()
            continue
        if ch in "+-*/^(),;:":
            tokens.append(Token("op", ch, pos + 1))
            pos += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", pos + 1, text)
    tokens.append(Token("end", None, len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.column, self.text)

    def accept(self, op):
        if self.tok.kind == "op" and self.tok.value == op:
            self.i += 1
            return True
        return False

    def expect(self, op):
        if not self.accept(op):
            found = "end of input" if self.tok.kind == "end" else repr(self.tok.value)
            raise self.error(f"expected {op!r}, found {found}")

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected token {self.tok.value!r}")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.value in "+-":
            op = self.tok.value
            self.i += 1
            node = ast.BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.value in "*/":
            op = self.tok.value
            self.i += 1
            node = ast.BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.accept("-"):
            return ast.Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.accept("^"):
            return ast.BinOp("^", base, self.unary())
        return base

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return ast.Const(tok.value)
        if tok.kind == "op" and tok.value == "(":
            self.i += 1
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            self.i += 1
            name = tok.value
            if name == "z":
                return ast.Var()
            if name in CONSTANTS:
                return ast.Const(complex(CONSTANTS[name]))
            if name in ast.UNARY_FUNCTIONS:
                return self.call(name, tok)
            if name in CONSTRUCTORS:
                return self.constructor(name, tok)
            raise self.error(f"unknown identifier {name!r}", tok)
        if tok.kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected token {tok.value!r}")

    def call(self, name, tok):
        self.expect("(")
        arg = self.expr()
        if self.tok.kind == "op" and self.tok.value in ",;":
            raise self.error(f"{name}() takes exactly one argument", tok)
        self.expect(")")
        return ast.Call(name, arg)

    def _constant(self, start):
        node = self.expr()
        if node.has_variable():
            raise self.error("constructor arguments must be constants", start)
        return complex(node.evaluate(0j))

    def constructor(self, name, tok):
        self.expect("(")
        items = []
        if not (self.tok.kind == "op" and self.tok.value == ")"):
            while True:
                start = self.tok
                value = self._constant(start)
                mult = 1
                if name == "blaschke" and self.accept(":"):
                    mtok = self.tok
                    if mtok.kind != "num" or mtok.value.imag != 0 or not mtok.value.real.is_integer() \
                            or mtok.value.real < 1:
                        raise self.error("multiplicity must be a positive integer", mtok)
                    mult = int(mtok.value.real)
                    self.i += 1
                if name == "blaschke" and not abs(value) < 1:
                    raise self.error("Blaschke zeros must lie inside the unit disk", start)
                items.append((value, mult))
                if not (self.accept(";") or self.accept(",")):
                    break
        self.expect(")")
        if name == "blaschke":
            return ast.BlaschkeNode(_merge(items))
        coeffs = [v for v, _ in items]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs or coeffs[-1] == 0:
            raise self.error("poly() needs a nonzero leading coefficient", tok)
        return ast.PolyNode(tuple(coeffs))


def _merge(items):
    order, mult = [], {}
    for a, m in items:
        if a not in mult:
            order.append(a)
            mult[a] = 0
        mult[a] += m
    return tuple((a, mult[a]) for a in order)


def parse_expression(text):
    """Parse to a bare expression tree."""
    if not text or not text.strip():
        raise ParseError("empty function spec", 1, text or "")
    return _Parser(text).parse()


def parse_function(text, domain=None):
    """Parse ``text`` into the most specific :class:`FunctionSpec` variant."""
    return from_node(parse_expression(text), domain)
