"""Decorated rooted trees and forests.

A tree encodes one integral term: vertices carry a :class:`Label` (a formal
product of named functions and twist factors), edges carry a kernel index.
A :class:`Forest` is a formal integer combination of canonical trees and
encodes an integral polynomial.

All values are immutable. Labels are normalized on construction; trees are
not, so that positions in a hand-built tree mean what the caller wrote.
Use :func:`canonicalize` (or build through :class:`Forest`) before comparing.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple

IDENTIFIER = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

FUNC = 0
TWIST = 1
TWIST_INV = 2

Path = tuple[int, ...]


@dataclass(frozen=True, order=True)
class Atom:
    """One factor of a vertex label.

    ``kind`` is FUNC, TWIST or TWIST_INV; ``name`` is the function name or
    the kernel index. The dataclass ordering (kind first, then name) is the
    canonical atom order.
    """

    kind: int
    name: str

    def __post_init__(self):
        if self.kind not in (FUNC, TWIST, TWIST_INV):
            raise ValueError(f"unknown atom kind {self.kind!r}")
        if not isinstance(self.name, str) or not IDENTIFIER.match(self.name):
            raise ValueError(f"invalid identifier {self.name!r}")

    @classmethod
    def func(cls, name: str) -> Atom:
        return cls(FUNC, name)

    @classmethod
    def twist(cls, index: str) -> Atom:
        return cls(TWIST, index)

    @classmethod
    def twist_inv(cls, index: str) -> Atom:
        return cls(TWIST_INV, index)

    def __str__(self):
        if self.kind == FUNC:
            return self.name
        if self.kind == TWIST:
            return f"τ_{self.name}"
        return f"τ_{self.name}⁻¹"


@dataclass(frozen=True)
class Label:
    """Canonical multiset of atoms; the empty label is the constant 1.

    Twist/inverse-twist pairs on the same index cancel eagerly, so a label
    never holds both ``Twist(w)`` and ``TwistInv(w)``.
    """

    atoms: tuple[Atom, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", _normalize_atoms(self.atoms))

    @classmethod
    def of(cls, *atoms: Atom | str) -> Label:
        """Build a label; bare strings are taken as function names."""
        return cls(tuple(Atom.func(a) if isinstance(a, str) else a for a in atoms))

    def __mul__(self, other: Label) -> Label:
        if not isinstance(other, Label):
            return NotImplemented
        return Label(self.atoms + other.atoms)

    def with_twist(self, index: str) -> Label:
        return Label(self.atoms + (Atom.twist(index),))

    def with_twist_inv(self, index: str) -> Label:
        return Label(self.atoms + (Atom.twist_inv(index),))

    def is_one(self) -> bool:
        return not self.atoms

    def __len__(self):
        return len(self.atoms)

    def __str__(self):
        if not self.atoms:
            return "1"
        return "·".join(str(a) for a in display_order(self.atoms))


def _normalize_atoms(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    funcs: list[Atom] = []
    net: Counter[str] = Counter()
    for atom in atoms:
        if not isinstance(atom, Atom):
            raise TypeError(f"expected Atom, got {atom!r}")
        if atom.kind == FUNC:
            funcs.append(atom)
        elif atom.kind == TWIST:
            net[atom.name] += 1
        else:
            net[atom.name] -= 1
    out = sorted(funcs)
    for index in sorted(net):
        power = net[index]
        if power > 0:
            out.extend([Atom.twist(index)] * power)
        elif power < 0:
            out.extend([Atom.twist_inv(index)] * -power)
    out.sort()
    return tuple(out)


def display_order(atoms: Iterable[Atom]) -> list[Atom]:
    """Twists, then inverse twists, then functions; used by the printers."""
    return sorted(atoms, key=lambda a: ((a.kind - 1) % 3, a.name))


ONE = Label()


@dataclass(frozen=True, eq=False)
class Tree:
    """Rooted tree with a labelled root and ordered ``(edge_index, subtree)`` children."""

    root: Label = ONE
    children: tuple[tuple[str, Tree], ...] = ()

    def __post_init__(self):
        if not isinstance(self.root, Label):
            raise TypeError(f"root must be a Label, got {self.root!r}")
        kids = tuple((edge, sub) for edge, sub in self.children)
        for edge, sub in kids:
            if not isinstance(edge, str) or not IDENTIFIER.match(edge):
                raise ValueError(f"invalid kernel index {edge!r}")
            if not isinstance(sub, Tree):
                raise TypeError(f"child must be a Tree, got {sub!r}")
        object.__setattr__(self, "children", kids)

    @classmethod
    def leaf(cls, *atoms: Atom | str) -> Tree:
        return cls(Label.of(*atoms))

    @cached_property
    def key(self) -> tuple:
        # Structure before decoration: children keys, then the root label.
        return (
            tuple((edge, sub.key) for edge, sub in self.children),
            self.root.atoms,
        )

    @cached_property
    def _hash(self) -> int:
        return hash(self.key)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return self is other or self.key == other.key

    def __lt__(self, other: Tree) -> bool:
        return self.key < other.key

    def subtree(self, path: Path) -> Tree:
        node = self
        for depth, pos in enumerate(path):
            if not 0 <= pos < len(node.children):
                raise AddressError(f"no child {pos} at depth {depth} of path {list(path)}")
            node = node.children[pos][1]
        return node

    def replace(self, path: Path, new: Tree) -> Tree:
        """Return a copy with the vertex at ``path`` swapped for ``new`` (no re-sorting)."""
        if not path:
            return new
        pos, rest = path[0], path[1:]
        if not 0 <= pos < len(self.children):
            raise AddressError(f"no child {pos} in path {list(path)}")
        edge, sub = self.children[pos]
        kids = list(self.children)
        kids[pos] = (edge, sub.replace(rest, new))
        return Tree(self.root, tuple(kids))

    def vertices(self) -> Iterator[tuple[Path, Tree]]:
        """Preorder walk yielding ``(path, subtree)``."""
        stack: list[tuple[Path, Tree]] = [((), self)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for pos in range(len(node.children) - 1, -1, -1):
                stack.append((path + (pos,), node.children[pos][1]))

    @cached_property
    def edge_count(self) -> int:
        return sum(1 + sub.edge_count for _, sub in self.children)

    def is_branch_free(self) -> bool:
        node = self
        while node.children:
            if len(node.children) > 1:
                return False
            node = node.children[0][1]
        return True

    def __repr__(self):
        if not self.children:
            return f"Tree({str(self.root)!r})"
        kids = ", ".join(f"({e!r}, {s!r})" for e, s in self.children)
        return f"Tree({str(self.root)!r}, [{kids}])"


class AddressError(IndexError):
    """A vertex path or child position does not exist in the tree."""


def chain(root: Label | str, *links: tuple[str, Label | str]) -> Tree:
    """Branch-free tree ``root -e1- l1 -e2- l2 ...``; strings are function names."""
    labels = [_as_label(root)] + [_as_label(lab) for _, lab in links]
    edges = [e for e, _ in links]
    node = Tree(labels[-1])
    for edge, lab in zip(reversed(edges), reversed(labels[:-1])):
        node = Tree(lab, ((edge, node),))
    return node


def _as_label(value: Label | str) -> Label:
    if isinstance(value, Label):
        return value
    return ONE if value == "1" else Label.of(value)


def canonicalize(t: Tree) -> Tree:
    """Sort every sibling list by ``(edge_index, subtree key)``; idempotent."""
    if not t.children:
        return t
    kids = tuple(sorted(((e, canonicalize(s)) for e, s in t.children),
                        key=lambda c: (c[0], c[1].key)))
    if kids == t.children:
        return t
    return Tree(t.root, kids)


def is_canonical(t: Tree) -> bool:
    return canonicalize(t) is t


def graft(t: Tree, u: Tree) -> Tree:
    """Merge the roots of ``t`` and ``u``: product of the two integral terms."""
    return canonicalize(Tree(t.root * u.root, t.children + u.children))


def extend(t: Tree, omega: str) -> Tree:
    """New root labelled 1 joined to ``t`` by an edge ``omega``: applies P_omega."""
    return Tree(ONE, ((omega, canonicalize(t)),))


class Metrics(NamedTuple):
    """Edge count, terminal-branch count, total terminal-branch length."""

    E: int
    N: int
    D: int

    def __str__(self):
        return f"E={self.E} N={self.N} D={self.D}"


def terminal_branches(t: Tree) -> list[tuple[Path, Path]]:
    """One ``(branch_root, leaf)`` path pair per leaf.

    A terminal branch runs from the nearest branching ancestor of a leaf (or
    from the root, when there is none) up to that leaf. The lone root of a
    single-vertex tree is not a leaf, so that tree has no terminal branches.
    """
    out: list[tuple[Path, Path]] = []

    def walk(node: Tree, path: Path, start: Path):
        if len(node.children) > 1:
            start = path
        for pos, (_, sub) in enumerate(node.children):
            child_path = path + (pos,)
            if sub.children:
                walk(sub, child_path, start)
            else:
                out.append((start, child_path))

    walk(t, (), ())
    return out


def metrics(t: Tree) -> Metrics:
    branches = terminal_branches(t)
    depth = sum(len(leaf) - len(start) for start, leaf in branches)
    return Metrics(t.edge_count, len(branches), depth)


class Forest:
    """Formal integer combination of canonical trees with no zero coefficients.

    Terms are kept in canonical tree order, which fixes the print order.
    """

    __slots__ = ("terms", "_index")

    def __init__(self, terms: Mapping[Tree, int] | Iterable[tuple[Tree, int]] = ()):
        acc: dict[Tree, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for tree, coeff in items:
            if not isinstance(coeff, int) or isinstance(coeff, bool):
                raise TypeError(f"coefficients must be int, got {coeff!r}")
            tree = canonicalize(tree)
            acc[tree] = acc.get(tree, 0) + coeff
        ordered = tuple(sorted(((t, c) for t, c in acc.items() if c), key=lambda tc: tc[0].key))
        self.terms: tuple[tuple[Tree, int], ...] = ordered
        self._index = dict(ordered)

    @classmethod
    def of(cls, *trees: Tree) -> Forest:
        return cls((t, 1) for t in trees)

    def __iter__(self) -> Iterator[tuple[Tree, int]]:
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __getitem__(self, tree: Tree) -> int:
        return self._index.get(canonicalize(tree), 0)

    def trees(self) -> list[Tree]:
        return [t for t, _ in self.terms]

    def __eq__(self, other):
        if not isinstance(other, Forest):
            return NotImplemented
        return self._index == other._index

    def __hash__(self):
        return hash(self.terms)

    def __add__(self, other: Forest) -> Forest:
        if not isinstance(other, Forest):
            return NotImplemented
        return Forest(self.terms + other.terms)

    def __neg__(self) -> Forest:
        return self.scale(-1)

    def __sub__(self, other: Forest) -> Forest:
        if not isinstance(other, Forest):
            return NotImplemented
        return self + (-other)

    def scale(self, c: int) -> Forest:
        return Forest((t, c * k) for t, k in self.terms)

    def __rmul__(self, c: int) -> Forest:
        return self.scale(c)

    def edge_count(self) -> int:
        return sum(t.edge_count for t, _ in self.terms)

    def max_edges(self) -> int:
        return max((t.edge_count for t, _ in self.terms), default=0)

    def is_branch_free(self) -> bool:
        return all(t.is_branch_free() for t, _ in self.terms)

    def __repr__(self):
        return f"Forest({list(self.terms)!r})"


def forest_add(f: Forest, g: Forest) -> Forest:
    return f + g


def forest_scale(f: Forest, c: int) -> Forest:
    return f.scale(c)
