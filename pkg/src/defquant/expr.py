"""Parser for the expression grammar used by configs and the command line.

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := power (('*'|'/') power)*
    power  := atom ['^' INT]
    atom   := INT | NAME | 'lam' | '(' expr ')'

Division is only allowed by a nonzero constant, so ``1/2*lam*z`` parses but
``x/y`` does not.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping, Sequence

from .series import DEFAULT_ORDER, LAM, PolySeries

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


class ParseError(ValueError):
    pass


def tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} at {pos}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", int(num)))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, variables, order, env):
        self.toks = tokens
        self.i = 0
        self.vars = tuple(variables)
        self.order = order
        self.env = env or {}

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, op):
        t = self.take()
        if t != ("op", op):
            raise ParseError(f"expected {op!r}, got {'end of expression' if t[0] is None else repr(t[1])}")

    def expr(self):
        sign = 1
        if self.peek() in (("op", "+"), ("op", "-")):
            sign = -1 if self.take()[1] == "-" else 1
        acc = self.term() * sign
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self):
        acc = self.power()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.power()
            if op == "*":
                acc = acc * rhs
            else:
                if not rhs.is_constant() or rhs.lambda_valuation() != 0 or len(rhs.terms) != 1:
                    raise ParseError("division is only defined by a nonzero rational constant")
                acc = acc * (1 / next(iter(rhs.terms.values())))
        return acc

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num":
                raise ParseError("exponent must be a nonnegative integer")
            return base ** val
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return PolySeries.const(self.vars, val, self.order)
        if kind == "name":
            if val == LAM:
                return PolySeries.lam(self.vars, self.order)
            if val in self.env:
                return self.env[val].with_order(self.order) if isinstance(self.env[val], PolySeries) \
                    else PolySeries.const(self.vars, self.env[val], self.order)
            if val in self.vars:
                return PolySeries.var(self.vars, val, self.order)
            raise ParseError(f"unknown name {val!r} (variables: {', '.join(self.vars)})")
        if (kind, val) == ("op", "("):
            e = self.expr()
            self.expect(")")
            return e
        if kind is None:
            raise ParseError("unexpected end of expression")
        raise ParseError(f"unexpected token {val!r}")


def parse(text: str, variables: Sequence[str], order: int = DEFAULT_ORDER,
          env: Mapping[str, PolySeries] = None) -> PolySeries:
    """Parse ``text`` into a PolySeries over ``variables`` truncated at ``order``."""
    toks = tokenize(text)
    if not toks:
        raise ParseError("empty expression")
    p = _Parser(toks, variables, order, env)
    out = p.expr()
    if p.i != len(toks):
        raise ParseError(f"trailing input at token {p.peek()[1]!r}")
    return out


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational number: {text!r}") from exc
