"""Twisted Rota-Baxter rewriting of decorated trees.

The single rewrite (:func:`rb_step`) is the tree form of

    P_a(f) P_b(g) = t_b P_a(t_b^-1 f P_b(g)) + t_a P_b(t_a^-1 P_a(f) g)

applied at one branching vertex to two of its branches. :func:`reduce`
repeats it at a branching point of maximum height until no tree branches.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

from .trees import (
    Forest,
    Label,
    Metrics,
    Path,
    Tree,
    canonicalize,
    chain,
    metrics,
)


class RewriteError(ValueError):
    """Bad rewrite request (not a branching point, bad pair, ...)."""


class InvariantViolation(RuntimeError):
    """An internal guarantee of the reduction failed; indicates a bug."""


@dataclass(frozen=True)
class RewriteStep:
    tree_before: Tree
    coefficient: int
    vertex: Path
    pair: tuple[int, int]
    outputs: tuple[Tree, Tree]
    metrics_before: Metrics
    metrics_after: tuple[Metrics, Metrics]
    origin: int = 0


@dataclass
class RewriteTrace:
    input: Forest
    output: Forest = field(default_factory=Forest)
    steps: list[RewriteStep] = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def replay(self) -> Forest:
        """Re-apply every recorded step to ``input``; must reproduce ``output``."""
        acc = dict(self.input.terms)
        for step in self.steps:
            acc[step.tree_before] = acc.get(step.tree_before, 0) - step.coefficient
            for out in step.outputs:
                acc[out] = acc.get(out, 0) + step.coefficient
        return Forest(acc)


def _resort(tree: Tree, path: Path) -> Tree:
    """Re-sort sibling lists along ``path`` after the vertex at its end changed.

    Everything off the path is already canonical, so only ancestors need work.
    """
    if not path:
        return canonicalize(tree)
    pos, rest = path[0], path[1:]
    kids = list(tree.children)
    edge, sub = kids[pos]
    kids[pos] = (edge, _resort(sub, rest))
    kids.sort(key=lambda c: (c[0], c[1].key))
    return Tree(tree.root, tuple(kids))


def rb_step(t: Tree, vertex: Path, i: int, j: int) -> tuple[Tree, Tree]:
    """Apply the twisted Rota-Baxter identity to children ``i`` and ``j`` of ``vertex``.

    With child i on edge a (head label f) and child j on edge b, the first
    output relabels the vertex t_b*x and moves child j, whole, under the
    head of child i, whose label gains t_b^-1. The second output is the
    same with the roles swapped. Everything else is untouched.
    """
    vertex = tuple(vertex)
    node = t.subtree(vertex)
    if len(node.children) < 2:
        raise RewriteError(f"vertex {list(vertex)} has {len(node.children)} children; "
                           "not a branching point")
    n = len(node.children)
    if not (0 <= i < n and 0 <= j < n):
        raise RewriteError(f"child positions ({i}, {j}) out of range for {n} children")
    if i == j:
        raise RewriteError(f"invalid pair ({i}, {j}): positions must differ")

    def moved(keep: int, move: int) -> Tree:
        edge_k, sub_k = node.children[keep]
        edge_m, sub_m = node.children[move]
        head = Tree(sub_k.root.with_twist_inv(edge_m),
                    sub_k.children + ((edge_m, sub_m),))
        kids = []
        for pos, c in enumerate(node.children):
            if pos == keep:
                kids.append((edge_k, canonicalize(head)))
            elif pos != move:
                kids.append(c)
        local = Tree(node.root.with_twist(edge_m), tuple(kids))
        return _resort(t.replace(vertex, local), vertex)

    return moved(i, j), moved(j, i)


def branching_points(t: Tree) -> list[Path]:
    return [path for path, node in t.vertices() if len(node.children) > 1]


def select_redex(t: Tree) -> tuple[Path, int, int] | None:
    """Deepest branching point (smallest path on ties) and its first two children."""
    points = branching_points(t)
    if not points:
        return None
    best = min(points, key=lambda p: (-len(p), p))
    return best, 0, 1


def check_step(step: RewriteStep) -> None:
    """Edge conservation and the (N, D) case split that guarantees termination."""
    before = step.metrics_before
    node = step.tree_before.subtree(step.vertex)
    for k, (after, pos) in enumerate(zip(step.metrics_after, step.pair)):
        if after.E != before.E:
            raise InvariantViolation(f"step changed edge count: {before} -> {after}")
        branch_len = _chain_length(node.children[pos][1]) + 1
        if branch_len == 1:
            ok = after.N == before.N - 1
        else:
            ok = after.N == before.N and after.D == before.D - 1
        if not ok:
            raise InvariantViolation(
                f"output {k} breaks descent: branch length {branch_len}, {before} -> {after}")


def _chain_length(t: Tree) -> int:
    n = 0
    while t.children:
        if len(t.children) > 1:
            raise InvariantViolation("selected branch is not terminal")
        t = t.children[0][1]
        n += 1
    return n


def step_ceiling(f: Forest) -> int:
    e = f.edge_count()
    return max(4 ** e, math.factorial(e))


def reduce(f: Forest, check: bool = True) -> tuple[Forest, RewriteTrace]:
    """Rewrite ``f`` until no tree has a branching point.

    Trees are taken smallest-canonical-first; equal trees produced along the
    way merge their coefficients. Returns the reduced forest and the trace.
    """
    trace = RewriteTrace(input=f)
    done: dict[Tree, int] = {}
    pending: dict[Tree, int] = {}
    origin: dict[Tree, int] = {}
    heap: list = []
    counter = itertools.count()

    def push(tree: Tree, coeff: int, src: int):
        if tree.is_branch_free():
            done[tree] = done.get(tree, 0) + coeff
            return
        if tree not in pending:
            heapq.heappush(heap, (tree.key, next(counter), tree))
            pending[tree] = coeff
            origin[tree] = src
        else:
            pending[tree] += coeff
            origin[tree] = min(origin[tree], src)

    for n, (tree, coeff) in enumerate(f):
        push(tree, coeff, n)

    ceiling = step_ceiling(f)
    while heap:
        _, _, tree = heapq.heappop(heap)
        coeff = pending.pop(tree, 0)
        src = origin.pop(tree, 0)
        if coeff == 0:
            continue
        if len(trace.steps) >= ceiling:
            raise InvariantViolation(f"reduction exceeded {ceiling} steps")
        vertex, i, j = select_redex(tree)
        t1, t2 = rb_step(tree, vertex, i, j)
        step = RewriteStep(tree, coeff, vertex, (i, j), (t1, t2),
                           metrics(tree), (metrics(t1), metrics(t2)), src)
        if check:
            check_step(step)
        trace.steps.append(step)
        push(t1, coeff, src)
        push(t2, coeff, src)

    out = Forest(done)
    if check and not out.is_branch_free():
        raise InvariantViolation("reduced forest still branches")
    trace.output = out
    return out, trace


def iterated_rule(a: Label, f_branch: tuple[str, Label | Tree],
                  g_chain: list[tuple[str, Label]], m: int | None = None) -> Forest:
    """Closed form for ``a * P_alpha(f) * P_b1(g1 P_b2(g2 ... P_bm(gm)))``.

    Gives the m+1 chains directly instead of running the reduction: a head
    term with f lifted to the bottom, m-1 middle terms with f spliced in
    above g_i, and a tail term with f on top.
    """
    if m is None:
        m = len(g_chain)
    if m < 1:
        raise RewriteError(f"invalid arity m={m}: need at least one iterate")
    if len(g_chain) != m:
        raise RewriteError(f"g_chain has {len(g_chain)} links, expected m={m}")
    alpha, f = f_branch
    if isinstance(f, Tree):
        if f.children:
            raise RewriteError("f branch must be a single vertex")
        f = f.root
    betas = [b for b, _ in g_chain]
    gs = [g for _, g in g_chain]

    head = chain(a.with_twist(betas[0]),
                 (alpha, f.with_twist_inv(betas[0])),
                 *zip(betas, gs))
    terms = [head]
    for i in range(1, m):
        # f spliced between g_i (0-based i-1) and g_{i+1}
        links = list(zip(betas[:i - 1], gs[:i - 1]))
        links.append((betas[i - 1], gs[i - 1].with_twist_inv(alpha).with_twist(betas[i])))
        links.append((alpha, f.with_twist_inv(betas[i])))
        links.extend(zip(betas[i:], gs[i:]))
        terms.append(chain(a.with_twist(alpha), *links))
    tail_links = list(zip(betas[:-1], gs[:-1]))
    tail_links.append((betas[-1], gs[-1].with_twist_inv(alpha)))
    tail_links.append((alpha, f))
    terms.append(chain(a.with_twist(alpha), *tail_links))
    return Forest.of(*terms)


def iterated_input(a: Label, f_branch: tuple[str, Label], g_chain: list[tuple[str, Label]]) -> Tree:
    """The branching tree whose reduction :func:`iterated_rule` gives in closed form."""
    alpha, f = f_branch
    return canonicalize(Tree(a, ((alpha, Tree(f)), (g_chain[0][0], chain(g_chain[0][1], *g_chain[1:])))))
