"""Closed-form single-variable expressions used in bindings files.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := unary (("*"|"/") unary)*
    unary  := "-" unary | power
    power  := atom ["^" ["-"] integer]
    atom   := number | "x" | "t" | ("sin"|"cos"|"exp") "(" expr ")" | "(" expr ")"

``x`` and ``t`` name the same variable, so ``h=exp(t)`` reads naturally.
Expressions compile to closures that accept floats or numpy arrays.
"""

from __future__ import annotations

import re
from typing import Callable

import numpy as np

_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)"
                    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


class ScalarSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at column {pos + 1} in {text!r}")
        self.pos = pos


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ScalarSyntaxError(f"unexpected character {text[start]!r}", text, start)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


Fn = Callable[[object], object]


class _Compiler:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, value: str | None = None):
        kind, val, pos = self.toks[self.i]
        if value is not None and val != value:
            found = "end of expression" if kind == "end" else repr(val)
            raise ScalarSyntaxError(f"expected {value!r}, found {found}", self.text, pos)
        self.i += 1
        return kind, val, pos

    def compile(self) -> Fn:
        fn = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ScalarSyntaxError(f"unexpected {val!r}", self.text, pos)
        return fn

    def expr(self) -> Fn:
        fn = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            lhs, rhs = fn, self.term()
            fn = (lambda a, b: lambda x: a(x) + b(x))(lhs, rhs) if op == "+" else \
                (lambda a, b: lambda x: a(x) - b(x))(lhs, rhs)
        return fn

    def term(self) -> Fn:
        fn = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            lhs, rhs = fn, self.unary()
            fn = (lambda a, b: lambda x: a(x) * b(x))(lhs, rhs) if op == "*" else \
                (lambda a, b: lambda x: a(x) / b(x))(lhs, rhs)
        return fn

    def unary(self) -> Fn:
        if self.peek()[1] == "-":
            self.take()
            inner = self.unary()
            return lambda x: -inner(x)
        return self.power()

    def power(self) -> Fn:
        base = self.atom()
        if self.peek()[1] != "^":
            return base
        self.take()
        negative = False
        if self.peek()[1] == "-":
            self.take()
            negative = True
        kind, val, pos = self.take()
        if kind != "num" or not val.isdigit():
            raise ScalarSyntaxError("exponent must be an integer", self.text, pos)
        k = -int(val) if negative else int(val)
        return lambda x: base(x) ** k if k >= 0 else 1.0 / base(x) ** (-k)

    def atom(self) -> Fn:
        kind, val, pos = self.take()
        if kind == "num":
            c = float(val)
            return lambda x: c + 0 * x
        if kind == "name":
            if val in ("x", "t"):
                return lambda x: x + 0.0
            if val in _FUNCS:
                f = _FUNCS[val]
                self.take("(")
                inner = self.expr()
                self.take(")")
                return lambda x: f(inner(x))
            raise ScalarSyntaxError(f"unknown name {val!r}", self.text, pos)
        if val == "(":
            inner = self.expr()
            self.take(")")
            return inner
        found = "end of expression" if kind == "end" else repr(val)
        raise ScalarSyntaxError(f"expected a number, variable or function, found {found}",
                                self.text, pos)


class ScalarExpr:
    """A compiled expression; call it with a float or an array."""

    __slots__ = ("text", "_fn")

    def __init__(self, text: str):
        self.text = text.strip()
        self._fn = _Compiler(self.text).compile()

    def __call__(self, x):
        return self._fn(np.asarray(x, dtype=float) if not isinstance(x, float) else x)

    def __repr__(self):
        return f"ScalarExpr({self.text!r})"

    def __str__(self):
        return self.text
