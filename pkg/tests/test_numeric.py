import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from oplinear.exprio import parse, parse_tree
from oplinear.numeric import (
    BindingError,
    Bindings,
    TwistSingularityError,
    cumulative_simpson,
    eval_forest,
    eval_label,
    eval_tree,
    simpson,
    verify_equivalence,
)
from oplinear.oracle import nested_simpson, ode_forest, ode_value
from oplinear.rewrite import rb_step, reduce
from oplinear.trees import Label, extend, graft
from tests import reference_forests as R
from tests.strategies import INDICES, trees

# exp/cos kernels with k(0) = 1 and polynomial functions for every name the strategies use
SMOOTH = (Bindings()
          .kernel("alpha", "exp(-x)", "exp(t)")
          .kernel("beta", "1", "cos(t)")
          .kernel("gamma", "1 + x", "1 - t/2")
          .kernel("delta", "exp(x/2)", "t + 1")
          .function("a", "1 + x")
          .function("f", "1")
          .function("g", "1")
          .function("h", "2 - x^2")
          .function("g1", "1 + x")
          .function("g2", "1 + x^3"))


def two_branch_exact(x):
    # P_alpha(1) = 1 - exp(-x), P_beta(1) = sin x for the bindings above
    return (1.0 - math.exp(-x)) * math.sin(x)


class TestQuadrature:
    def test_simpson_cubic(self):
        xs = np.linspace(0, 2, 9)
        assert simpson(xs ** 3, 0.25) == pytest.approx(4.0, rel=1e-14)

    def test_simpson_odd_rejected(self):
        with pytest.raises(ValueError):
            simpson(np.ones(4), 0.1)

    @pytest.mark.parametrize("n", [4, 6, 10])
    def test_cumulative_exact_on_cubics(self, n):
        xs = np.linspace(0, 1.5, n + 1)
        y = 1 - 2 * xs + 3 * xs ** 2 + xs ** 3
        exact = xs - xs ** 2 + xs ** 3 + xs ** 4 / 4
        assert np.allclose(cumulative_simpson(y, 1.5 / n), exact, rtol=0, atol=1e-13)

    def test_cumulative_two_intervals_exact_on_quadratics(self):
        xs = np.linspace(0, 1, 3)
        assert np.allclose(cumulative_simpson(3 * xs ** 2, 0.5), xs ** 3, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("n", [0, 3, 7])
    def test_cumulative_rejects(self, n):
        with pytest.raises(ValueError):
            cumulative_simpson(np.ones(n + 1), 0.1)


class TestEvaluate:
    def test_single_vertex(self):
        assert eval_tree(parse_tree("h"), SMOOTH, 0.5) == pytest.approx(1.75)

    def test_unit(self):
        assert eval_tree(parse_tree("1"), SMOOTH, 0.5) == 1.0

    def test_polynomial_integral_exact(self):
        b = Bindings().kernel("w", "x", "1").function("f", "1")
        # x * int_0^x 1 dt = x^2
        assert eval_tree(parse_tree("P[w](f)"), b, 0.7, n=2) == pytest.approx(0.49, rel=1e-15)

    @pytest.mark.parametrize("x, expected", [
        (0.25, 0.054725562052134524),
        (0.5, 0.18863925039151117),
        (1.0, 0.5319111091547843),
    ])
    def test_two_branch_closed_form(self, x, expected):
        assert two_branch_exact(x) == pytest.approx(expected, rel=1e-15)
        f = parse("P[alpha](f) * P[beta](g)")
        assert eval_forest(f, SMOOTH, x, n=64) == pytest.approx(expected, rel=1e-8)
        assert ode_forest(f, SMOOTH, x) == pytest.approx(expected, rel=1e-10)

    def test_convergence_order(self):
        b = Bindings().kernel("w", "1", "exp(t)").function("f", "1")
        t = parse_tree("P[w](P[w](1))")
        exact = (math.exp(2) - 1) / 2 - (math.e - 1)
        errs = [abs(eval_tree(t, b, 1.0, n) - exact) for n in (8, 16, 32, 64)]
        ratios = [errs[k] / errs[k + 1] for k in range(3)]
        assert all(14 < r < 18 for r in ratios), ratios

    def test_odd_n(self):
        with pytest.raises(ValueError):
            eval_tree(parse_tree("P[alpha](f)"), SMOOTH, 1.0, n=63)

    def test_unbound(self):
        with pytest.raises(BindingError, match="zeta"):
            eval_tree(parse_tree("P[zeta](f)"), SMOOTH, 1.0)
        with pytest.raises(BindingError, match="q"):
            eval_tree(parse_tree("q"), SMOOTH, 1.0)

    @settings(max_examples=60, deadline=None)
    @given(trees(max_edges=3), trees(max_edges=3), st.sampled_from([0.25, 0.5, 1.0]))
    def test_graft_is_product(self, t, u, x):
        lhs = eval_tree(graft(t, u), SMOOTH, x)
        rhs = eval_tree(t, SMOOTH, x) * eval_tree(u, SMOOTH, x)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)

    @settings(max_examples=40, deadline=None)
    @given(trees(max_edges=2), st.sampled_from(INDICES))
    def test_extend_is_integral(self, t, w):
        # shallow trees, so the literal nested Simpson sum is affordable
        x = 0.5
        assert eval_tree(extend(t, w), SMOOTH, x, n=64) == pytest.approx(
            nested_simpson(extend(t, w), SMOOTH, x, n=32), rel=1e-5, abs=1e-12)


class TestTwists:
    def test_twist_value(self):
        assert eval_label(Label.of().with_twist("gamma"), SMOOTH, 0.5) == pytest.approx(1.5)
        assert eval_label(Label.of().with_twist_inv("gamma"), SMOOTH, 0.5) == pytest.approx(1 / 1.5)

    def test_k_zero_at_origin(self):
        b = Bindings().kernel("w", "x", "1")
        with pytest.raises(TwistSingularityError):
            eval_label(Label.of().with_twist("w"), b, 0.5)

    def test_k_vanishes_inside(self):
        b = Bindings().kernel("w", "1 - 2*x", "1")
        with pytest.raises(TwistSingularityError):
            eval_tree(parse_tree("tauinv[w] * P[w](1)"), b, 1.0, n=4)

    def test_twist_free_kernel_may_vanish_at_zero(self):
        b = Bindings().kernel("K", "x", "1")
        assert eval_tree(parse_tree("P[K](1)"), b, 1.0) == pytest.approx(1.0)


class TestSoundness:
    @pytest.mark.parametrize("name", ["TWO_BRANCH", "CHAIN2", "CHAIN3", "COROLLA3", "NESTED_FORK", "IN_CONTEXT"])
    def test_worked_examples(self, name):
        b = (Bindings(dict(SMOOTH.kernels), dict(SMOOTH.functions))
             .kernel("beta1", "exp(x)", "1").kernel("beta2", "1 + x/2", "1 + t^2")
             .kernel("beta3", "cos(x)", "1 + t").kernel("lambda", "1", "exp(-t)")
             .kernel("sigma", "2 - x", "1")
             .function("b", "1 + x").function("c", "2 - x").function("d", "exp(x)")
             .function("e", "1 - x/3").function("g3", "1 + x^2")
             .function("f1", "1").function("f2", "1 + x").function("f3", "cos(x)")
             .function("f4", "2 + x").function("f5", "2"))
        f = parse(getattr(R, name + "_INPUT"))
        out, _ = reduce(f)
        report = verify_equivalence(f, out, b)
        assert report.passed, str(report)

    @settings(max_examples=40, deadline=None)
    @given(trees(max_edges=4))
    def test_single_step_sound(self, t):
        for path, node in t.vertices():
            if len(node.children) > 1:
                out = rb_step(t, path, 0, 1)
                for x in (0.3, 0.9):
                    lhs = eval_tree(t, SMOOTH, x)
                    rhs = eval_tree(out[0], SMOOTH, x) + eval_tree(out[1], SMOOTH, x)
                    assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-9)

    def test_counterexample(self):
        # with K(x, t) = x the plain product P(1) P(1) = x^4 but 2 P(P(1)) = (2/3) x^4
        b = Bindings().kernel("K", "x", "1")
        lhs = eval_forest(parse("P[K](1) * P[K](1)"), b, 1.0)
        rhs = eval_forest(parse("2 * P[K](P[K](1))"), b, 1.0)
        assert lhs == pytest.approx(1.0, abs=1e-12)
        assert rhs == pytest.approx(2 / 3, abs=1e-12)

    def test_report_detects_difference(self):
        f = parse(R.TWO_BRANCH_INPUT)
        wrong = parse("tau[beta]*a * P[alpha](tauinv[beta]*f * P[beta](g))")
        report = verify_equivalence(f, wrong, SMOOTH)
        assert not report.passed
        assert "FAIL" in str(report)

    def test_report_missing_bindings(self):
        with pytest.raises(BindingError, match="kernel omega"):
            verify_equivalence(parse("P[omega](f)"), parse("0"), SMOOTH)


class TestOracles:
    @pytest.mark.parametrize("src", [R.TWO_BRANCH_INPUT, R.CHAIN2_INPUT, "a * P[gamma](h * P[delta](g1))"])
    def test_agree(self, src):
        b = (Bindings(dict(SMOOTH.kernels), dict(SMOOTH.functions))
             .kernel("beta1", "exp(x)", "1").kernel("beta2", "1 + x^2", "x"))
        t = parse_tree(src)
        for x in (0.25, 1.0):
            grid = eval_tree(t, b, x, n=256)
            assert ode_value(t, b, x) == pytest.approx(grid, rel=1e-9)
            assert nested_simpson(t, b, x, n=32) == pytest.approx(grid, rel=1e-5)

    def test_nested_simpson_odd(self):
        with pytest.raises(ValueError):
            nested_simpson(parse_tree("P[alpha](f)"), SMOOTH, 1.0, 3)


class TestBindingsFile:
    TEXT = """
    # kernels
    kernel alpha k=exp(-x) h=exp(t)
    kernel beta  k = 1  h = cos(t)   # trailing comment
    func f = 1 + x^2
    """

    def test_parse(self):
        b = Bindings.parse(self.TEXT)
        assert set(b.kernels) == {"alpha", "beta"}
        assert b.kernels["beta"].h(0.0) == 1.0
        assert b.functions["f"](2.0) == 5.0

    def test_round_trip(self):
        b = Bindings.parse(self.TEXT)
        again = Bindings.parse(b.dumps())
        assert again.dumps() == b.dumps()

    def test_load(self, tmp_path):
        p = tmp_path / "b.txt"
        p.write_text(self.TEXT, encoding="utf-8")
        assert set(Bindings.load(p).functions) == {"f"}

    @pytest.mark.parametrize("bad", ["kernel w k=1", "func = 1", "kernel w k=1 h=y", "nonsense"])
    def test_errors(self, bad):
        with pytest.raises(BindingError, match="line 1"):
            Bindings.parse(bad)

    def test_missing(self):
        b = Bindings.parse(self.TEXT)
        assert b.missing(parse("g * P[alpha](tau[gamma]*f)")) == ["func g", "kernel gamma"]
