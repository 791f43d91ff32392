"""Ordered morphisms of finite sets and their parenthesizations.

An ordered morphism is a map of finite sets together with a total order
on every fiber. Composition orders composite fibers lexicographically:
first by the order of the outer fiber, then by the inner fibers. A
parenthesized ordered morphism additionally carries a full binary tree
on each fiber. Trees are built from leaf labels and :class:`Node`
objects; ``None`` is the empty tree of an empty fiber.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

__all__ = [
    "FinSet",
    "OrderedMorphism",
    "Node",
    "Tree",
    "leaves",
    "left_comb",
    "enumerate_parenthesizations",
    "ParenthesizedOrderedMorphism",
    "ReparenthesizationStep",
    "apply_step",
    "reparenthesization_path",
    "standard_parenthesization",
    "compose",
    "reverse",
    "compose_parenthesized",
    "graft",
    "identity",
    "render_polygons",
    "tree_str",
]

Label = Hashable


class OrdcatError(ValueError):
    pass


@dataclass(frozen=True)
class FinSet:
    elements: Tuple[Label, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if len(set(self.elements)) != len(self.elements):
            raise OrdcatError(f"repeated labels in {self.elements!r}")

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x):
        return x in self.elements


@dataclass(frozen=True)
class OrderedMorphism:
    """``source -> target`` with an explicit ordered fiber per target element."""

    source: FinSet
    target: FinSet
    fibers: Tuple[Tuple[Label, ...], ...]

    def __post_init__(self):
        src = self.source if isinstance(self.source, FinSet) else FinSet(self.source)
        tgt = self.target if isinstance(self.target, FinSet) else FinSet(self.target)
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "target", tgt)
        fibers = tuple(tuple(f) for f in self.fibers)
        object.__setattr__(self, "fibers", fibers)
        if len(fibers) != len(tgt):
            raise OrdcatError("one fiber sequence per target element is required")
        seen = [x for f in fibers for x in f]
        if sorted(map(repr, seen)) != sorted(map(repr, src.elements)) or len(set(seen)) != len(seen):
            raise OrdcatError("fiber sequences must partition the source")

    @classmethod
    def from_fibers(cls, fibers: Mapping[Label, Sequence[Label]], source: Optional[Sequence[Label]] = None):
        target = tuple(fibers)
        if source is None:
            source = tuple(x for j in target for x in fibers[j])
        return cls(FinSet(tuple(source)), FinSet(target), tuple(tuple(fibers[j]) for j in target))

    @classmethod
    def from_assignment(cls, assignment: Mapping[Label, Label], target: Sequence[Label], order: Optional[Sequence[Label]] = None):
        """Fibers ordered by ``order`` (default: iteration order of ``assignment``)."""
        order = list(assignment) if order is None else list(order)
        fib: Dict[Label, List[Label]] = {j: [] for j in target}
        for x in order:
            fib[assignment[x]].append(x)
        return cls(FinSet(tuple(order)), FinSet(tuple(target)), tuple(tuple(fib[j]) for j in target))

    def fiber(self, j: Label) -> Tuple[Label, ...]:
        return self.fibers[self.target.elements.index(j)]

    @property
    def assignment(self) -> Dict[Label, Label]:
        return {x: j for j, f in zip(self.target, self.fibers) for x in f}

    def __call__(self, x: Label) -> Label:
        return self.assignment[x]


def identity(s: Sequence[Label]) -> OrderedMorphism:
    s = tuple(s)
    return OrderedMorphism(FinSet(s), FinSet(s), tuple((x,) for x in s))


def compose(p: OrderedMorphism, q: OrderedMorphism) -> OrderedMorphism:
    """The composite ``q o p`` (apply ``p`` first)."""
    if set(p.target.elements) != set(q.source.elements):
        raise OrdcatError("target of p differs from source of q")
    fib = dict(zip(p.target, p.fibers))
    fibers = tuple(tuple(x for j in f for x in fib[j]) for f in q.fibers)
    return OrderedMorphism(p.source, q.target, fibers)


def reverse(p: OrderedMorphism) -> OrderedMorphism:
    return OrderedMorphism(p.source, p.target, tuple(tuple(reversed(f)) for f in p.fibers))


# ---------------------------------------------------------------- trees


@dataclass(frozen=True)
class Node:
    left: "Tree"
    right: "Tree"


Tree = object  # a leaf label, a Node, or None for the empty tree


def leaves(t: Tree) -> Tuple[Label, ...]:
    if t is None:
        return ()
    if isinstance(t, Node):
        return leaves(t.left) + leaves(t.right)
    return (t,)


def left_comb(labels: Sequence[Label]) -> Tree:
    labels = tuple(labels)
    if not labels:
        return None
    t = labels[0]
    for x in labels[1:]:
        t = Node(t, x)
    return t


def _trees(labels: Tuple[Label, ...]) -> List[Tree]:
    if len(labels) == 1:
        return [labels[0]]
    out = []
    for k in range(1, len(labels)):
        for a in _trees(labels[:k]):
            for b in _trees(labels[k:]):
                out.append(Node(a, b))
    return out


def enumerate_parenthesizations(n_or_labels) -> List[Tree]:
    """All full binary trees on the given leaves (``n`` means ``1..n``)."""
    labels = tuple(range(1, n_or_labels + 1)) if isinstance(n_or_labels, int) else tuple(n_or_labels)
    if not labels:
        return [None]
    return _trees(labels)


def tree_str(t: Tree) -> str:
    if t is None:
        return "()"
    if isinstance(t, Node):
        return f"({tree_str(t.left)} {tree_str(t.right)})"
    return str(t)


def subtree(t: Tree, path: Sequence[int]) -> Tree:
    for b in path:
        if not isinstance(t, Node):
            raise OrdcatError(f"path {tuple(path)} leaves the tree")
        t = t.right if b else t.left
    return t


def replace_subtree(t: Tree, path: Sequence[int], new: Tree) -> Tree:
    if not path:
        return new
    if not isinstance(t, Node):
        raise OrdcatError("path leaves the tree")
    if path[0]:
        return Node(t.left, replace_subtree(t.right, path[1:], new))
    return Node(replace_subtree(t.left, path[1:], new), t.right)


LEFT_TO_RIGHT = "L2R"  # ((A B) C) -> (A (B C))
RIGHT_TO_LEFT = "R2L"  # (A (B C)) -> ((A B) C)


@dataclass(frozen=True)
class ReparenthesizationStep:
    target_element: Label
    node_path: Tuple[int, ...]
    direction: str

    def inverse(self) -> "ReparenthesizationStep":
        d = RIGHT_TO_LEFT if self.direction == LEFT_TO_RIGHT else LEFT_TO_RIGHT
        return ReparenthesizationStep(self.target_element, self.node_path, d)


def rotation_blocks(t: Tree, step: ReparenthesizationStep) -> Tuple[Tree, Tree, Tree]:
    """The three subtrees ``(A, B, C)`` moved by ``step``, in leaf order."""
    s = subtree(t, step.node_path)
    if step.direction == LEFT_TO_RIGHT:
        if not (isinstance(s, Node) and isinstance(s.left, Node)):
            raise OrdcatError("left-to-right rotation needs an internal left child")
        return s.left.left, s.left.right, s.right
    if step.direction == RIGHT_TO_LEFT:
        if not (isinstance(s, Node) and isinstance(s.right, Node)):
            raise OrdcatError("right-to-left rotation needs an internal right child")
        return s.left, s.right.left, s.right.right
    raise OrdcatError(f"unknown direction {step.direction!r}")


def apply_step(t: Tree, step: ReparenthesizationStep) -> Tree:
    a, b, c = rotation_blocks(t, step)
    new = Node(a, Node(b, c)) if step.direction == LEFT_TO_RIGHT else Node(Node(a, b), c)
    return replace_subtree(t, step.node_path, new)


def _to_left_comb(t: Tree, target_element: Label) -> List[ReparenthesizationStep]:
    steps = []
    while True:
        path = _first_right_internal(t, ())
        if path is None:
            return steps
        st = ReparenthesizationStep(target_element, path, RIGHT_TO_LEFT)
        t = apply_step(t, st)
        steps.append(st)


def _first_right_internal(t: Tree, path: Tuple[int, ...]) -> Optional[Tuple[int, ...]]:
    if not isinstance(t, Node):
        return None
    if isinstance(t.right, Node):
        return path
    return _first_right_internal(t.left, path + (0,))


def reparenthesization_path(t1: Tree, t2: Tree, target_element: Label = None) -> List[ReparenthesizationStep]:
    """Rotations taking ``t1`` to ``t2`` through the left comb."""
    if leaves(t1) != leaves(t2):
        raise OrdcatError("trees have different leaf sequences")
    if t1 == t2:
        return []
    down = _to_left_comb(t1, target_element)
    up = _to_left_comb(t2, target_element)
    return down + [s.inverse() for s in reversed(up)]


# ------------------------------------------- parenthesized ordered morphisms


@dataclass(frozen=True)
class ParenthesizedOrderedMorphism:
    base: OrderedMorphism
    trees: Tuple[Tree, ...]

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        if len(self.trees) != len(self.base.fibers):
            raise OrdcatError("one tree per target element is required")
        for f, t in zip(self.base.fibers, self.trees):
            if leaves(t) != tuple(f):
                raise OrdcatError(f"tree {tree_str(t)} does not match fiber {f!r}")

    def tree(self, j: Label) -> Tree:
        return self.trees[self.base.target.elements.index(j)]

    @property
    def source(self) -> FinSet:
        return self.base.source

    @property
    def target(self) -> FinSet:
        return self.base.target


def standard_parenthesization(p: OrderedMorphism) -> ParenthesizedOrderedMorphism:
    return ParenthesizedOrderedMorphism(p, tuple(left_comb(f) for f in p.fibers))


def graft(t: Tree, subtrees: Mapping[Label, Tree]) -> Tree:
    """Replace each leaf ``j`` of ``t`` by ``subtrees[j]``; empty subtrees are pruned."""
    if t is None:
        return None
    if isinstance(t, Node):
        a, b = graft(t.left, subtrees), graft(t.right, subtrees)
        if a is None:
            return b
        if b is None:
            return a
        return Node(a, b)
    return subtrees[t]


def compose_parenthesized(p: ParenthesizedOrderedMorphism, q: ParenthesizedOrderedMorphism) -> ParenthesizedOrderedMorphism:
    base = compose(p.base, q.base)
    sub = dict(zip(p.target, p.trees))
    return ParenthesizedOrderedMorphism(base, tuple(graft(t, sub) for t in q.trees))


# ---------------------------------------------------------------- rendering


def render_polygons(p: OrderedMorphism) -> str:
    """Monospace picture: one polygon per target element.

    The fiber elements label the upper edges from left to right and the
    target element labels the base edge.
    """
    blocks = []
    for j, f in zip(p.target, p.fibers):
        labels = [str(x) for x in f] or ["."]
        w = max(3, *(len(s) for s in labels))
        cells = [s.center(w) for s in labels]
        top = " " + " ".join(cells) + " "
        edge = "+" + "+".join("-" * w for _ in cells) + "+"
        inner = len(edge) - 2
        base = "\\" + str(j).center(inner, "_") + "/"
        blocks.append([top, edge, base])
    if not blocks:
        return ""
    width = [max(len(r) for r in b) for b in blocks]
    lines = []
    for r in range(3):
        lines.append("   ".join(b[r].ljust(wd) for b, wd in zip(blocks, width)).rstrip())
    return "\n".join(lines) + "\n"
