"""Operator-linear reduction of separable Volterra integral polynomials."""

from .exprio import ParseError, parse, print_integral, print_operator, render_dot
from .numeric import Bindings, eval_forest, eval_tree, verify_equivalence
from .rewrite import iterated_rule, rb_step, reduce, select_redex
from .trees import Atom, Forest, Label, Tree, canonicalize, chain, extend, graft, metrics

__all__ = [
    "Atom", "Bindings", "Forest", "Label", "ParseError", "Tree", "canonicalize", "chain",
    "eval_forest", "eval_tree", "extend", "graft", "iterated_rule", "metrics", "parse",
    "print_integral", "print_operator", "rb_step", "reduce", "render_dot", "select_redex",
    "verify_equivalence",
]
