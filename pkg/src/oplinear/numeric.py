"""Numeric meaning of forests under concrete kernels and functions.

A kernel index w is bound to a separable kernel K_w(x, t) = k_w(x) h_w(t);
the twist is k_w(x) / k_w(0). A tree evaluates as

    value(x) = label(x) * prod over children (w, c) of k_w(x) * int_0^x h_w(t) value_c(t) dt

Every vertex is evaluated on one uniform grid over [0, x] with ``n``
subintervals. Child integrals at the interior grid nodes come from
fourth-order cumulative rules (Simpson on even nodes, Simpson plus the 3/8
rule on odd ones), so the whole tree costs O(n * vertices) rather than
n ** depth, and every rule is exact for cubics. The value at x itself is a
plain composite Simpson sum.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path as FilePath

import numpy as np

from .scalar import ScalarExpr
from .trees import FUNC, TWIST, Forest, Label, Tree

TWIST_EPS = 1e-12


class BindingError(ValueError):
    """A function or kernel used by a forest has no binding, or a binding is malformed."""


class TwistSingularityError(BindingError):
    """k_w vanishes where a twist on w has to be evaluated."""


@dataclass(frozen=True)
class KernelBinding:
    index: str
    k: ScalarExpr
    h: ScalarExpr


@dataclass
class Bindings:
    kernels: dict[str, KernelBinding] = field(default_factory=dict)
    functions: dict[str, ScalarExpr] = field(default_factory=dict)

    def kernel(self, index: str, k: str, h: str) -> Bindings:
        self.kernels[index] = KernelBinding(index, ScalarExpr(k), ScalarExpr(h))
        return self

    def function(self, name: str, expr: str) -> Bindings:
        self.functions[name] = ScalarExpr(expr)
        return self

    @classmethod
    def parse(cls, text: str) -> Bindings:
        """Read ``kernel <w> k=<expr> h=<expr>`` and ``func <name> = <expr>`` lines."""
        out = cls()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                if m := _KERNEL_LINE.match(line):
                    out.kernel(m["index"], m["k"], m["h"])
                elif m := _FUNC_LINE.match(line):
                    out.function(m["name"], m["expr"])
                else:
                    raise BindingError("expected 'kernel <index> k=<expr> h=<expr>' "
                                       "or 'func <name> = <expr>'")
            except ValueError as exc:
                raise BindingError(f"bindings line {lineno}: {exc}") from exc
        return out

    @classmethod
    def load(cls, path: str | FilePath) -> Bindings:
        return cls.parse(FilePath(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        lines = [f"kernel {b.index} k={b.k} h={b.h}" for b in self.kernels.values()]
        lines += [f"func {name} = {expr}" for name, expr in self.functions.items()]
        return "\n".join(lines) + "\n"

    def missing(self, f: Forest | Tree) -> list[str]:
        """Unbound names used by ``f``, as ``kernel w`` / ``func g`` strings."""
        trees = f.trees() if isinstance(f, Forest) else [f]
        need = set()
        for tree in trees:
            for _, node in tree.vertices():
                for atom in node.root.atoms:
                    if atom.kind == FUNC and atom.name not in self.functions:
                        need.add(f"func {atom.name}")
                    elif atom.kind != FUNC and atom.name not in self.kernels:
                        need.add(f"kernel {atom.name}")
                for edge, _ in node.children:
                    if edge not in self.kernels:
                        need.add(f"kernel {edge}")
        return sorted(need)


_KERNEL_LINE = re.compile(r"kernel\s+(?P<index>[A-Za-z][A-Za-z0-9_]*)\s+k\s*=\s*(?P<k>.+?)\s+h\s*=\s*(?P<h>.+)$")
_FUNC_LINE = re.compile(r"func\s+(?P<name>[A-Za-z][A-Za-z0-9_]*)\s*=\s*(?P<expr>.+)$")


def _kernel(b: Bindings, index: str) -> KernelBinding:
    try:
        return b.kernels[index]
    except KeyError:
        raise BindingError(f"kernel {index!r} is not bound") from None


def _broadcast(value, x):
    return np.broadcast_to(np.asarray(value, dtype=float), np.shape(x)).astype(float)


def eval_label(label: Label, b: Bindings, x):
    """Product of the label's atoms at ``x`` (float or array)."""
    xs = np.asarray(x, dtype=float)
    out = np.ones(xs.shape)
    for atom in label.atoms:
        if atom.kind == FUNC:
            try:
                fn = b.functions[atom.name]
            except KeyError:
                raise BindingError(f"function {atom.name!r} is not bound") from None
            out = out * _broadcast(fn(xs), xs)
            continue
        kb = _kernel(b, atom.name)
        k0 = float(kb.k(0.0))
        kx = _broadcast(kb.k(xs), xs)
        if abs(k0) < TWIST_EPS:
            raise TwistSingularityError(f"twist on {atom.name!r} needs k({atom.name})(0) != 0, got {k0!r}")
        if atom.kind == TWIST:
            out = out * (kx / k0)
        else:
            if np.any(np.abs(kx) < TWIST_EPS):
                bad = float(xs.flat[int(np.argmin(np.abs(kx)))]) if xs.ndim else float(xs)
                raise TwistSingularityError(f"inverse twist on {atom.name!r}: k vanishes near x={bad!r}")
            out = out * (k0 / kx)
    return float(out) if out.ndim == 0 else out


def simpson(y: np.ndarray, dx: float) -> float:
    """Composite Simpson over an odd number of equally spaced samples."""
    n = len(y) - 1
    if n < 2 or n % 2:
        raise ValueError(f"Simpson needs an even number of subintervals, got {n}")
    return dx / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def cumulative_simpson(y: np.ndarray, dx: float) -> np.ndarray:
    """Running integral of samples ``y`` from the first node to every node.

    Even nodes use composite Simpson. Odd nodes k >= 3 add the 3/8 rule on
    the last three intervals to Simpson up to k-3; node 1 uses a cubic
    through the first four samples (a quadratic through three if n == 2).
    """
    n = len(y) - 1
    if n < 2 or n % 2:
        raise ValueError(f"need an even number of subintervals >= 2, got {n}")
    out = np.zeros(n + 1)
    pair = dx / 3.0 * (y[0:-2:2] + 4.0 * y[1:-1:2] + y[2::2])
    out[2::2] = np.cumsum(pair)
    if n >= 3:
        out[1] = dx / 24.0 * (9 * y[0] + 19 * y[1] - 5 * y[2] + y[3])
    else:
        out[1] = dx / 12.0 * (5 * y[0] + 8 * y[1] - y[2])
    if n >= 4:
        k = np.arange(3, n + 1, 2)
        tail = 3.0 * dx / 8.0 * (y[k - 3] + 3 * y[k - 2] + 3 * y[k - 1] + y[k])
        out[k] = out[k - 3] + tail
    return out


def _on_grid(t: Tree, b: Bindings, grid: np.ndarray, dx: float) -> np.ndarray:
    values = _broadcast(eval_label(t.root, b, grid), grid)
    for edge, sub in t.children:
        kb = _kernel(b, edge)
        inner = _broadcast(kb.h(grid), grid) * _on_grid(sub, b, grid, dx)
        values = values * _broadcast(kb.k(grid), grid) * cumulative_simpson(inner, dx)
    return values


def _check_n(n: int):
    if not isinstance(n, int) or n < 2 or n % 2:
        raise ValueError(f"subinterval count must be an even integer >= 2, got {n!r}")


def eval_tree(t: Tree, b: Bindings, x: float, n: int = 64) -> float:
    _check_n(n)
    if not t.children:
        return float(eval_label(t.root, b, float(x)))
    grid = np.linspace(0.0, float(x), n + 1)
    return float(_on_grid(t, b, grid, float(x) / n)[-1])


def eval_forest(f: Forest, b: Bindings, x: float, n: int = 64) -> float:
    return math.fsum(c * eval_tree(t, b, x, n) for t, c in f)


@dataclass(frozen=True)
class VerifyConfig:
    samples: tuple[float, ...] = (0.25, 0.5, 1.0)
    n: int = 64
    tol: float = 1e-6


@dataclass(frozen=True)
class SampleResult:
    x: float
    lhs: float
    rhs: float
    abs_dev: float
    rel_dev: float
    ok: bool


@dataclass(frozen=True)
class EquivalenceReport:
    rows: tuple[SampleResult, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def max_rel(self) -> float:
        return max((r.rel_dev for r in self.rows), default=0.0)

    @property
    def max_abs(self) -> float:
        return max((r.abs_dev for r in self.rows), default=0.0)

    def __str__(self):
        lines = [f"{'x':>8} {'input':>22} {'output':>22} {'abs dev':>10} {'rel dev':>10}"]
        for r in self.rows:
            lines.append(f"{r.x:8.4g} {r.lhs:22.15g} {r.rhs:22.15g} {r.abs_dev:10.3e} "
                         f"{r.rel_dev:10.3e} {'ok' if r.ok else 'FAIL'}")
        lines.append(f"{'PASS' if self.passed else 'FAIL'} (tol {self.tol:g}, max rel {self.max_rel:.3e})")
        return "\n".join(lines)


def verify_equivalence(f_in: Forest, f_out: Forest, b: Bindings,
                       xs=(0.25, 0.5, 1.0), n: int = 64, tol: float = 1e-6) -> EquivalenceReport:
    """Compare two forests pointwise.

    A sample passes when the relative deviation is within ``tol``, or, when
    both values are themselves below ``tol`` in magnitude, when the absolute
    deviation is.
    """
    missing = sorted(set(b.missing(f_in)) | set(b.missing(f_out)))
    if missing:
        raise BindingError("unbound: " + ", ".join(missing))
    rows = []
    for x in xs:
        lhs = eval_forest(f_in, b, x, n)
        rhs = eval_forest(f_out, b, x, n)
        dev = abs(lhs - rhs)
        scale = max(abs(lhs), abs(rhs))
        rel = dev / scale if scale > 0 else 0.0
        ok = dev <= tol if scale < tol else rel <= tol
        rows.append(SampleResult(float(x), lhs, rhs, dev, rel, ok))
    return EquivalenceReport(tuple(rows), tol)
