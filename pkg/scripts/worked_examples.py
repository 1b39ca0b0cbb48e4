"""Reduce each worked example, compare with the hand-written expectation and check numerically.

    python scripts/worked_examples.py [--integral]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from oplinear.exprio import parse, print_integral, print_operator  # noqa: E402
from oplinear.numeric import Bindings, verify_equivalence  # noqa: E402
from oplinear.rewrite import reduce  # noqa: E402
from tests import reference_forests as R  # noqa: E402

NAMES = ["TWO_BRANCH", "CHAIN2", "CHAIN3", "COROLLA3", "NESTED_FORK"]

BINDINGS = """
kernel alpha  k=exp(-x)  h=exp(t)
kernel beta   k=1        h=cos(t)
kernel beta1  k=exp(x)   h=1
kernel beta2  k=1 + x/2  h=1 + t^2
kernel beta3  k=cos(x)   h=1 + t
kernel gamma  k=1 + x    h=1 - t/2
kernel delta  k=exp(x/2) h=t + 1
kernel lambda k=1        h=exp(-t)
kernel sigma  k=2 - x    h=1
func a = 1 + x
func b = 1 + x
func c = 2 - x
func d = exp(x)
func e = 1 - x/3
func f = 1
func g = 1
func h = 2 - x^2
func g1 = 1 + x
func g2 = 1 + x^3
func g3 = 1 + x^2
func f1 = 1
func f2 = 1 + x
func f3 = cos(x)
func f4 = 2 + x
func f5 = 2
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--integral", action="store_true", help="also print nested-integral notation")
    args = ap.parse_args()
    b = Bindings.parse(BINDINGS)
    status = 0
    for name in NAMES:
        f = parse(getattr(R, name + "_INPUT"))
        start = time.perf_counter()
        out, trace = reduce(f)
        ms = (time.perf_counter() - start) * 1e3
        expected = parse(getattr(R, name + "_OUTPUT"))
        report = verify_equivalence(f, out, b)
        match = out == expected
        status |= not (match and report.passed)
        print(f"== {name}: {len(trace)} steps, {len(out)} chains, {ms:.2f} ms, "
              f"matches expected: {match}, numeric max rel dev {report.max_rel:.2e}")
        print("   in : " + print_operator(f))
        for t, c in out:
            print("   out: " + print_operator(type(out)({t: c})))
        if args.integral:
            print("   ∫  : " + print_integral(out))
    return status


if __name__ == "__main__":
    sys.exit(main())
