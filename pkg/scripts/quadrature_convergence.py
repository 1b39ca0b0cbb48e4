"""Error of the grid evaluator against closed forms as the step halves.

Fourth-order quadrature should cut the error about 16x per halving.

    python scripts/quadrature_convergence.py
"""

import math

from oplinear.exprio import parse
from oplinear.numeric import Bindings, eval_forest
from oplinear.oracle import ode_forest

CASES = [
    ("P[w](P[w](1)), k=1, h=exp(t), x=1",
     "P[w](P[w](1))",
     Bindings().kernel("w", "1", "exp(t)"),
     (math.exp(2) - 1) / 2 - (math.e - 1)),
    ("P[a](1) * P[b](1), k_a=exp(-x), h_a=exp(t), k_b=1, h_b=cos(t), x=1",
     "P[a](1) * P[b](1)",
     Bindings().kernel("a", "exp(-x)", "exp(t)").kernel("b", "1", "cos(t)"),
     (1 - math.exp(-1)) * math.sin(1)),
    ("six-deep chain, k=1, h=exp(t), x=1 (reference: ODE solve)",
     "P[w](P[w](P[w](P[w](P[w](P[w](1))))))",
     Bindings().kernel("w", "1", "exp(t)"),
     None),
]


def main():
    for title, src, b, exact in CASES:
        f = parse(src)
        if exact is None:
            exact = ode_forest(f, b, 1.0)
        print(title)
        print(f"{'n':>6} {'value':>22} {'rel error':>11} {'ratio':>7}")
        prev = None
        for n in (8, 16, 32, 64, 128, 256):
            v = eval_forest(f, b, 1.0, n)
            err = abs(v - exact) / abs(exact)
            ratio = f"{prev / err:7.2f}" if prev and err else ""
            print(f"{n:6d} {v:22.15g} {err:11.3e} {ratio}")
            prev = err
        print()


if __name__ == "__main__":
    main()
