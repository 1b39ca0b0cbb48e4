"""Text forms of forests: the operator grammar, integral notation, DOT, traces.

Operator grammar (whitespace-insensitive)::

    forest := ["+"|"-"] term (("+"|"-") term)*  |  "0"
    term   := [integer "*"] factor ("*" factor)*
    factor := identifier | "P[" index "](" forest ")"
            | "tau[" index "]" | "tauinv[" index "]" | "1"

The argument of ``P[...]`` must be a single term; an integer coefficient
inside it is pulled out by linearity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .rewrite import RewriteStep, RewriteTrace
from .trees import FUNC, TWIST, Atom, Forest, Label, Tree, display_order

MAX_NESTING = 200


class ParseError(ValueError):
    """Syntax error at a 1-based ``line``/``column`` of the source."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class NestingError(ParseError):
    """A ``P[...]`` argument is a sum of several terms."""


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, a punctuation character, or EOF
    text: str
    line: int
    column: int


_TOKEN = re.compile(r"(?P<ws>\s+)|(?P<IDENT>[A-Za-z][A-Za-z0-9_]*)|(?P<INT>[0-9]+)|(?P<punct>[-+*()\[\]])")


def tokenize(src: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        col = pos - line_start + 1
        if m.lastgroup == "ws":
            for k, ch in enumerate(m.group(), start=pos):
                if ch == "\n":
                    line, line_start = line + 1, k + 1
        elif m.lastgroup == "punct":
            tokens.append(Token(m.group(), m.group(), line, col))
        else:
            tokens.append(Token(m.lastgroup, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.pos = 0
        self.depth = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def error(self, message: str, tok: Token | None = None, cls=ParseError):
        tok = tok or self.tok
        return cls(message, tok.line, tok.column)

    def expect(self, kind: str) -> Token:
        tok = self.tok
        if tok.kind != kind:
            found = "end of input" if tok.kind == "EOF" else repr(tok.text)
            raise self.error(f"expected {kind!r}, found {found}")
        self.pos += 1
        return tok

    def parse(self) -> Forest:
        if self.tok.kind == "INT" and self.tok.text.lstrip("0") == "" and self.peek().kind == "EOF":
            return Forest()
        terms = self.forest()
        if self.tok.kind != "EOF":
            raise self.error(f"unexpected {self.tok.text!r}")
        return Forest(terms)

    def forest(self) -> list[tuple[Tree, int]]:
        sign = 1
        if self.tok.kind in ("+", "-"):
            sign = -1 if self.tok.kind == "-" else 1
            self.pos += 1
        terms = [self.term(sign)]
        while self.tok.kind in ("+", "-"):
            sign = -1 if self.tok.kind == "-" else 1
            self.pos += 1
            terms.append(self.term(sign))
        return terms

    def term(self, sign: int) -> tuple[Tree, int]:
        coeff = sign
        if self.tok.kind == "INT" and self.peek().kind == "*":
            coeff *= int(self.tok.text)
            self.pos += 2
        atoms: list[Atom] = []
        children: list[tuple[str, Tree]] = []
        while True:
            coeff *= self.factor(atoms, children)
            if self.tok.kind != "*":
                break
            self.pos += 1
        return Tree(Label(tuple(atoms)), tuple(children)), coeff

    def index(self) -> str:
        self.expect("[")
        name = self.expect("IDENT").text
        self.expect("]")
        return name

    def factor(self, atoms: list[Atom], children: list[tuple[str, Tree]]) -> int:
        tok = self.tok
        if tok.kind == "INT":
            if tok.text != "1":
                raise self.error(f"integer {tok.text} must be a leading coefficient followed by '*'")
            self.pos += 1
            return 1
        if tok.kind != "IDENT":
            found = "end of input" if tok.kind == "EOF" else repr(tok.text)
            raise self.error(f"expected a factor, found {found}")
        bracketed = self.peek().kind == "["
        if bracketed and tok.text == "P":
            self.pos += 1
            omega = self.index()
            self.expect("(")
            self.depth += 1
            if self.depth > MAX_NESTING:
                raise self.error(f"nesting deeper than {MAX_NESTING}", tok)
            inner = self.forest()
            self.depth -= 1
            if len(inner) != 1:
                raise self.error("argument of P[...] must be a single term", tok, NestingError)
            self.expect(")")
            sub, coeff = inner[0]
            children.append((omega, sub))
            return coeff
        if bracketed and tok.text in ("tau", "tauinv"):
            self.pos += 1
            omega = self.index()
            atoms.append(Atom.twist(omega) if tok.text == "tau" else Atom.twist_inv(omega))
            return 1
        self.pos += 1
        atoms.append(Atom.func(tok.text))
        return 1


def parse(src: str) -> Forest:
    """Parse operator-form text into a canonical forest."""
    return _Parser(src).parse()


def parse_tree(src: str) -> Tree:
    f = parse(src)
    if len(f) != 1 or f.terms[0][1] != 1:
        raise ValueError(f"expected a single tree with coefficient 1, got {len(f)} terms")
    return f.terms[0][0]


def _atom_op(a: Atom) -> str:
    if a.kind == FUNC:
        return a.name
    return f"{'tau' if a.kind == TWIST else 'tauinv'}[{a.name}]"


def _tree_op(t: Tree) -> str:
    parts = []
    if not t.root.is_one():
        parts.append("*".join(_atom_op(a) for a in display_order(t.root.atoms)))
    parts.extend(f"P[{edge}]({_tree_op(sub)})" for edge, sub in t.children)
    return " * ".join(parts) if parts else "1"


def _join(terms: list[tuple[str, int]], times: str, minus: str) -> str:
    if not terms:
        return "0"
    out = []
    for n, (body, coeff) in enumerate(terms):
        mag = abs(coeff)
        text = body if mag == 1 else f"{mag}{times}{body}"
        if n == 0:
            out.append(text if coeff > 0 else f"-{text}")
        else:
            out.append(f" + {text}" if coeff > 0 else f" {minus} {text}")
    return "".join(out)


def print_operator(f: Forest) -> str:
    return _join([(_tree_op(t), c) for t, c in f], " * ", "-")


def print_tree(t: Tree) -> str:
    return _tree_op(t)


def _tree_int(t: Tree) -> str:
    parts = [] if t.root.is_one() and t.children else [str(t.root)]
    parts.extend(f"(∫_{edge} {_tree_int(sub)})" for edge, sub in t.children)
    return " ".join(parts)


def print_integral(f: Forest) -> str:
    """Nested-integral notation for reading, e.g. ``a (∫_alpha f)(∫_beta g)``."""
    return _join([(_tree_int(t), c) for t, c in f], "·", "−")


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dot(f: Forest) -> str:
    """One ``digraph`` per tree; nodes numbered in preorder, root double-circled."""
    if not f:
        return "digraph empty {\n}\n"
    blocks = []
    for k, (tree, coeff) in enumerate(f):
        lines = [f"digraph tree{k} {{", "  rankdir=BT;"]
        if coeff != 1:
            lines.append(f"  label={_dot_quote(f'coefficient {coeff}')};")
        names = {}
        for n, (path, node) in enumerate(tree.vertices()):
            names[path] = f"t{k}_n{n}"
            shape = "doublecircle" if not path else "circle"
            lines.append(f"  {names[path]} [label={_dot_quote(str(node.root))}, shape={shape}];")
        for path, node in tree.vertices():
            for pos, (edge, _) in enumerate(node.children):
                lines.append(f"  {names[path]} -> {names[path + (pos,)]} [label={_dot_quote(edge)}];")
        lines.append("}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def format_step(k: int, step: RewriteStep) -> str:
    (a1, a2) = step.metrics_after
    before = step.metrics_before
    vertex = ".".join(str(p) for p in step.vertex)
    return (f"step={k} tree={step.origin} vertex={vertex} pair={step.pair[0]},{step.pair[1]} "
            f"E={before.E} N_before={before.N} D_before={before.D} "
            f"N_after={a1.N},{a2.N} D_after={a1.D},{a2.D}")


def format_trace(trace: RewriteTrace) -> str:
    """One record per step; steps count from 1, positions from 0, root vertex is empty."""
    return "".join(format_step(k, s) + "\n" for k, s in enumerate(trace.steps, start=1))


def parse_trace_line(line: str) -> dict:
    fields = dict(item.split("=", 1) for item in line.split())
    ints = lambda s: tuple(int(v) for v in s.split(",")) if s else ()
    return {
        "step": int(fields["step"]),
        "tree": int(fields["tree"]),
        "vertex": tuple(int(v) for v in fields["vertex"].split(".")) if fields["vertex"] else (),
        "pair": ints(fields["pair"]),
        "E": int(fields["E"]),
        "N_before": int(fields["N_before"]),
        "D_before": int(fields["D_before"]),
        "N_after": ints(fields["N_after"]),
        "D_after": ints(fields["D_after"]),
    }
