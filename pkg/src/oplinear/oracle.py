"""Reference evaluators that share no quadrature code with :mod:`oplinear.numeric`.

``nested_simpson`` follows the definition literally: each integral is a
fresh composite Simpson sum on [0, t] for every outer node t. Its cost is
(n + 1) ** depth, so keep it to shallow trees.

``ode_value`` treats every edge integral I_e(t) = int_0^t h_e(s) V_c(s) ds as
a state variable with I_e' = h_e(t) V_c(t) and integrates the system with
an adaptive high-order Runge-Kutta method.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp

from .numeric import Bindings, eval_label
from .trees import Forest, Tree


def _nested(t: Tree, b: Bindings, x: np.ndarray, n: int) -> np.ndarray:
    value = np.asarray(eval_label(t.root, b, x), dtype=float) * np.ones_like(x)
    if not t.children:
        return value
    s = np.linspace(0.0, 1.0, n + 1)
    w = np.ones(n + 1)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    w /= 3.0 * n
    nodes = x[:, None] * s[None, :]
    for edge, sub in t.children:
        kb = b.kernels[edge]
        inner = _nested(sub, b, nodes.ravel(), n).reshape(nodes.shape)
        integral = x * ((kb.h(nodes) * np.ones_like(nodes) * inner) @ w)
        value = value * kb.k(x) * integral
    return value


def nested_simpson(t: Tree, b: Bindings, x: float, n: int) -> float:
    if n < 2 or n % 2:
        raise ValueError(f"need an even number of subintervals, got {n}")
    return float(_nested(t, b, np.array([float(x)]), n)[0])


def _edges(t: Tree) -> list[tuple[str, Tree]]:
    out = []
    for _, node in t.vertices():
        out.extend(node.children)
    return out


def ode_value(t: Tree, b: Bindings, x: float, rtol: float = 1e-12, atol: float = 1e-15) -> float:
    if not t.children:
        return float(eval_label(t.root, b, float(x)))
    slots: dict[int, int] = {}

    def number(node: Tree):
        for edge, sub in node.children:
            slots[id(sub)] = len(slots)
            number(sub)

    number(t)

    def value(node: Tree, s: float, state: np.ndarray) -> float:
        v = float(eval_label(node.root, b, s))
        for edge, sub in node.children:
            v *= float(b.kernels[edge].k(s)) * state[slots[id(sub)]]
        return v

    def rhs(s, state):
        d = np.empty_like(state)

        def fill(node: Tree):
            for edge, sub in node.children:
                d[slots[id(sub)]] = float(b.kernels[edge].h(s)) * value(sub, s, state)
                fill(sub)

        fill(t)
        return d

    sol = solve_ivp(rhs, (0.0, float(x)), np.zeros(len(slots)), method="DOP853",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"ODE oracle failed: {sol.message}")
    return value(t, float(x), sol.y[:, -1])


def ode_forest(f: Forest, b: Bindings, x: float) -> float:
    return math.fsum(c * ode_value(t, b, x) for t, c in f)
