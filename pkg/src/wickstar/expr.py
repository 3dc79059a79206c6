"""Kähler potential expressions: a small recursive-descent parser and a
Taylor expander into jets.

Grammar (whitespace insignificant)::

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := atom ('^' ['('] ['-'] integer [')'])?
    atom   := rational | 'i' | 'z' index | 'zbar' index | 'log' '(' expr ')' | '(' expr ')'
    rational := integer ('/' positive-integer)?

``i`` is the imaginary unit, so rendered Gaussian coefficients such as
``(1/2-3*i)*z1`` parse back.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from gmpy2 import mpq

from .jets import I, Jet, JetContext, SingularConstantTerm

__all__ = [
    "Num", "Var", "Add", "Sub", "Neg", "Mul", "Pow", "Log", "Recip",
    "ExprSyntaxError", "LogBaseNotOne", "DivisionBySingular",
    "parse_expr", "expand_jet", "jet_from_text",
]


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class LogBaseNotOne(ValueError):
    """A ``log`` argument does not equal 1 at the base point."""


class DivisionBySingular(ZeroDivisionError):
    """A reciprocal argument vanishes at the base point."""


@dataclass(frozen=True)
class Num:
    value: object  # mpq or GaussianRational

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var:
    index: int  # 1-based
    bar: bool = False

    def __str__(self):
        return f"{'zbar' if self.bar else 'z'}{self.index}"


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Log:
    arg: object


@dataclass(frozen=True)
class Recip:
    arg: object


_TOKEN = re.compile(r"\s*(?:(\d+)|(zbar|z)(\d+)|(log)|(i)(?![a-z0-9])|([-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", start)
        start = m.start() + len(m.group(0)) - len(m.group(0).lstrip())
        if m.group(1) is not None:
            out.append(("int", int(m.group(1)), start))
        elif m.group(2) is not None:
            out.append(("var", (m.group(2) == "zbar", int(m.group(3))), start))
        elif m.group(4) is not None:
            out.append(("log", None, start))
        elif m.group(5) is not None:
            out.append(("imag", None, start))
        else:
            out.append((m.group(6), None, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text: str, n: int):
        self.toks = _tokenize(text)
        self.i = 0
        self.n = n

    def peek(self):
        return self.toks[self.i][0]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            what = "end of input" if tok[0] == "end" else repr(tok[0])
            raise ExprSyntaxError(f"expected {kind!r}, found {what}", tok[2])
        self.i += 1
        return tok

    def expr(self):
        if self.peek() == "-":
            self.take()
            node = Neg(self.term())
        else:
            node = self.term()
        while self.peek() in "+-":
            op = self.take()[0]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()[0]
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Mul(node, Recip(rhs))
        return node

    def factor(self):
        node = self.atom()
        if self.peek() == "^":
            self.take()
            paren = self.peek() == "("
            if paren:
                self.take()
            sign = 1
            if self.peek() == "-":
                self.take()
                sign = -1
            k = self.take("int")[1] * sign
            if paren:
                self.take(")")
            node = Pow(node, k)
        return node

    def atom(self):
        kind, val, pos = self.toks[self.i]
        if kind == "int":
            self.take()
            # rational literal p/q binds tighter than division
            if self.peek() == "/" and self.toks[self.i + 1][0] == "int":
                self.take()
                q = self.take("int")
                if q[1] == 0:
                    raise ExprSyntaxError("zero denominator", q[2])
                return Num(mpq(val, q[1]))
            return Num(mpq(val))
        if kind == "imag":
            self.take()
            return Num(I)
        if kind == "var":
            bar, idx = val
            if not 1 <= idx <= self.n:
                raise ExprSyntaxError(f"variable index {idx} out of range 1..{self.n}", pos)
            self.take()
            return Var(idx, bar)
        if kind == "log":
            self.take()
            self.take("(")
            node = self.expr()
            self.take(")")
            return Log(node)
        if kind == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        what = "end of input" if kind == "end" else repr(kind)
        raise ExprSyntaxError(f"unexpected {what}", pos)


def parse_expr(text: str, n: int):
    """Parse ``text`` into an expression tree over ``n`` complex variables."""
    p = _Parser(text, n)
    node = p.expr()
    if p.peek() != "end":
        raise ExprSyntaxError(f"unexpected {p.peek()!r}", p.toks[p.i][2])
    return node


def expand_jet(e, ctx: JetContext) -> Jet:
    """Taylor-expand an expression tree around ``ctx.base`` up to ``ctx.order``.

    Variables are replaced by ``base + x`` so the series engine stays
    centered at zero.
    """
    if isinstance(e, Num):
        return ctx.constant(e.value)
    if isinstance(e, Var):
        return ctx.coordinate(e.index - 1 + (ctx.n if e.bar else 0))
    if isinstance(e, Add):
        return expand_jet(e.left, ctx) + expand_jet(e.right, ctx)
    if isinstance(e, Sub):
        return expand_jet(e.left, ctx) - expand_jet(e.right, ctx)
    if isinstance(e, Neg):
        return -expand_jet(e.arg, ctx)
    if isinstance(e, Mul):
        return expand_jet(e.left, ctx) * expand_jet(e.right, ctx)
    if isinstance(e, Pow):
        base = expand_jet(e.base, ctx)
        if e.exponent < 0:
            return _reciprocal(base) ** (-e.exponent)
        return base ** e.exponent
    if isinstance(e, Recip):
        return _reciprocal(expand_jet(e.arg, ctx))
    if isinstance(e, Log):
        arg = expand_jet(e.arg, ctx)
        if arg.constant_term() != 1:
            raise LogBaseNotOne(f"log argument equals {arg.constant_term()} at the base point, not 1")
        return arg.log1p_of_unit()
    raise TypeError(f"not an expression node: {e!r}")


def _reciprocal(j: Jet) -> Jet:
    try:
        return j.invert()
    except SingularConstantTerm:
        raise DivisionBySingular("reciprocal of an expression vanishing at the base point") from None


def jet_from_text(text: str, ctx: JetContext) -> Jet:
    return expand_jet(parse_expr(text, ctx.n), ctx)
