"""Rational Drinfeld associators and the fusion coherence data built from them.

Conventions. Chord series act as operators, so when moves are performed
one after the other the later move multiplies on the left. The basic
rotation ``((X Y) Z) -> (X (Y Z))`` of blocks of strands acts by
``Phi^{X,Y,Z} = Phi(t^{XY}, t^{YZ})`` where ``t^{XY}`` is the sum of
chords between the blocks. A crossing in which the left block moves to
the right over the right block acts by ``exp(+1/2 t^{XY})``, which is the
braiding ``exp(hbar t/2)`` composed with the symmetry. With these
conventions the pentagon reads

    Phi^{1,2,34} Phi^{12,3,4} = Phi^{2,3,4} Phi^{1,23,4} Phi^{1,2,3}.

``Phi = exp(phi)`` with ``phi`` a Lie series in ``A = t^{12}`` and
``B = t^{23}``; the solver determines ``phi`` degree by degree.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import freealg
from .chords import ChordError, ChordSeries, _letter, _substitute
from .linalg import Inconsistent, kernel, solve
from .ordcat import (
    LEFT_TO_RIGHT,
    RIGHT_TO_LEFT,
    Node,
    ParenthesizedOrderedMorphism,
    ReparenthesizationStep,
    Tree,
    _to_left_comb,
    apply_step,
    leaves,
    left_comb,
    reparenthesization_path,
    rotation_blocks,
    subtree,
    tree_str,
    replace_subtree,
)
from .rational import Q, parse_q, q_str

__all__ = [
    "SolverError",
    "Associator",
    "solve_associator",
    "trivial_associator",
    "check_pentagon",
    "check_hexagons",
    "check_units",
    "Move",
    "braid_to_chord",
    "fusion_braid",
    "fusion_braid_recursive",
    "FusionElement",
    "fusion_element",
    "nu",
    "higher_associator",
    "doubled",
    "as_strands",
    "composable_pairs",
    "two_functoriality_residual",
]

MAX_DEGREE = 4
TIE_BREAKS = ("zero", "unit")

A, B = 0, 1


class SolverError(RuntimeError):
    pass


# ---------------------------------------------------------------- associator


@dataclass
class Associator:
    """``Phi = exp(phi)`` with ``phi`` a Lie series in two letters."""

    degree: int
    log_poly: Dict[Tuple[int, ...], Q]
    tie_break: str = "zero"
    _cache: Dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.log_poly = {w: Q(c) for w, c in self.log_poly.items() if c and len(w) <= self.degree}
        self.poly = freealg.exp(self.log_poly, self.degree)
        self.inv_poly = freealg.exp(freealg.scale(self.log_poly, -1), self.degree)

    @property
    def phi(self) -> ChordSeries:
        """``Phi`` as a chord series on strands ``1, 2, 3``."""
        return self.on_blocks((1,), (2,), (3,), (1, 2, 3))

    def lie_coordinates(self, d: int) -> Dict[Tuple[int, ...], Q]:
        """Coordinates of the degree-``d`` part of ``phi`` in the Lyndon basis."""
        basis = freealg.lyndon_basis(2, d)
        cols = {w: p for w, p in basis}
        return solve(cols, freealg.homogeneous(self.log_poly, d), [w for w, _ in basis])

    def on_blocks(self, X: Sequence, Y: Sequence, Z: Sequence, strands: Sequence, inverse: bool = False, trunc: Optional[int] = None) -> ChordSeries:
        """``Phi^{X,Y,Z}`` (or its inverse) on ``strands`` via cabling."""
        trunc = self.degree if trunc is None else min(trunc, self.degree)
        key = (tuple(X), tuple(Y), tuple(Z), tuple(strands), inverse, trunc)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        s = ChordSeries(strands, trunc)
        ix = [s.index(x) for x in X]
        iy = [s.index(y) for y in Y]
        iz = [s.index(z) for z in Z]
        image = {
            A: [(_letter(a, b), 1) for a in ix for b in iy],
            B: [(_letter(b, c), 1) for b in iy for c in iz],
        }
        poly = self.inv_poly if inverse else self.poly
        s.terms = _substitute(poly, image, trunc)
        if len(self._cache) > 4096:
            self._cache.clear()
        self._cache[key] = s
        return s

    def to_json_obj(self) -> dict:
        return {
            "degree": self.degree,
            "tie_break": self.tie_break,
            "log": [
                {"word": "".join("AB"[x] for x in w), "coeff": q_str(c)}
                for w, c in sorted(self.log_poly.items(), key=lambda kv: (len(kv[0]), kv[0]))
            ],
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Associator":
        log_poly = {tuple("AB".index(ch) for ch in t["word"]): parse_q(t["coeff"]) for t in obj["log"]}
        return cls(int(obj["degree"]), log_poly, obj.get("tie_break", "zero"))

    @property
    def ident(self) -> str:
        data = json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(data.encode()).hexdigest()[:16]


def trivial_associator(degree: int) -> Associator:
    return Associator(degree, {}, "trivial")


# --------------------------------------------------------------- residuals

_P = (1, 2, 3, 4)
_T = (1, 2, 3)


def _pentagon_sides(phi: Associator, trunc: int) -> Tuple[ChordSeries, ChordSeries]:
    f = lambda X, Y, Z: phi.on_blocks(X, Y, Z, _P, trunc=trunc)  # noqa: E731
    lhs = f((1,), (2,), (3, 4)) * f((1, 2), (3,), (4,))
    rhs = f((2,), (3,), (4,)) * f((1,), (2, 3), (4,)) * f((1,), (2,), (3,))
    return lhs, rhs


def check_pentagon(phi: Associator, trunc: Optional[int] = None) -> ChordSeries:
    """``Phi^{1,2,34} Phi^{12,3,4} - Phi^{2,3,4} Phi^{1,23,4} Phi^{1,2,3}``."""
    trunc = phi.degree if trunc is None else trunc
    lhs, rhs = _pentagon_sides(phi, trunc)
    return lhs - rhs


def _crossing(strands: Sequence, X: Sequence, Y: Sequence, sign: int, trunc: int) -> ChordSeries:
    s = ChordSeries.zero(strands, trunc)
    for x in X:
        for y in Y:
            s = s + ChordSeries.chord(strands, x, y, trunc, Q(sign, 2))
    return s.exp()


def _hexagon_sides(phi: Associator, trunc: int, r_coeff=Q(1, 2)):
    f = lambda X, Y, Z, inv=False: phi.on_blocks((X,), (Y,), (Z,), _T, inverse=inv, trunc=trunc)  # noqa: E731

    def r(u, v):
        return ChordSeries.chord(_T, u, v, trunc, r_coeff).exp()

    def r2(u, v, w):
        return (ChordSeries.chord(_T, u, v, trunc, r_coeff) + ChordSeries.chord(_T, u, w, trunc, r_coeff)).exp()

    h1 = (f(3, 1, 2) * r(1, 3) * f(1, 3, 2, True) * r(2, 3) * f(1, 2, 3), r2(3, 1, 2))
    h2 = (f(2, 3, 1, True) * r(1, 3) * f(2, 1, 3) * r(1, 2) * f(1, 2, 3, True), r2(1, 2, 3))
    return h1, h2


def check_hexagons(phi: Associator, trunc: Optional[int] = None, r_coeff=Q(1, 2)) -> Tuple[ChordSeries, ChordSeries]:
    """Residuals of the two hexagon identities for the braiding ``exp(r_coeff*t)``.

    First: the third strand passes over the fused pair ``(1 2)``.
    Second: the first strand passes over the fused pair ``(2 3)``.
    """
    trunc = phi.degree if trunc is None else trunc
    (a1, b1), (a2, b2) = _hexagon_sides(phi, trunc, Q(r_coeff))
    return a1 - b1, a2 - b2


def check_units(phi: Associator) -> List[ChordSeries]:
    """``Phi`` with one strand deleted, minus one, for each strand."""
    p = phi.phi
    return [p.delete(u) - 1 for u in _T]


def check_group_like(phi: Associator) -> bool:
    return phi.phi.is_group_like()


# ------------------------------------------------------------------ solver


def _response(L: Mapping, d: int) -> Dict[tuple, Q]:
    """Linear change of all degree-``d`` residuals when ``phi_d`` gains ``L``."""
    tmp = Associator(d, {}, "probe")
    tmp.poly = dict(L)
    tmp.inv_poly = freealg.scale(L, -1)
    out: Dict[tuple, Q] = {}

    def put(tag, s: ChordSeries, sign):
        for w, c in s.degree_part(d).terms.items():
            k = (tag, w)
            v = out.get(k, 0) + sign * c
            if v:
                out[k] = v
            else:
                out.pop(k, None)

    f4 = lambda X, Y, Z: tmp.on_blocks(X, Y, Z, _P, trunc=d)  # noqa: E731
    for blocks, sg in (
        (((1,), (2,), (3, 4)), 1),
        (((1, 2), (3,), (4,)), 1),
        (((2,), (3,), (4,)), -1),
        (((1,), (2, 3), (4,)), -1),
        (((1,), (2,), (3,)), -1),
    ):
        put("pent", f4(*blocks), sg)
    f3 = lambda X, Y, Z: tmp.on_blocks((X,), (Y,), (Z,), _T, trunc=d)  # noqa: E731
    for blocks, sg in (((3, 1, 2), 1), ((1, 3, 2), -1), ((1, 2, 3), 1)):
        put("hex1", f3(*blocks), sg)
    for blocks, sg in (((2, 3, 1), -1), ((2, 1, 3), 1), ((1, 2, 3), -1)):
        put("hex2", f3(*blocks), sg)
    for k, u in enumerate(_T):
        put(("unit", k), f3(1, 2, 3).delete(u), 1)
    return out


def _residual(phi: Associator, d: int) -> Dict[tuple, Q]:
    out: Dict[tuple, Q] = {}
    pent = check_pentagon(phi, d)
    h1, h2 = check_hexagons(phi, d)
    for tag, s in (("pent", pent), ("hex1", h1), ("hex2", h2)):
        for w, c in s.degree_part(d).terms.items():
            out[(tag, w)] = c
    for k, s in enumerate(check_units(phi)):
        for w, c in s.degree_part(d).terms.items():
            out[(("unit", k), w)] = c
    return out


def solve_associator(D: int, tie_break: str = "zero", max_degree: int = MAX_DEGREE) -> Associator:
    """Solve pentagon, hexagons and unit constraints degree by degree.

    At each degree the unknowns are the coordinates of ``phi_d`` in the
    Lyndon basis, pivoted in Lyndon order. Free unknowns (the directions
    in which the homogeneous system has a kernel) are set to zero under
    the ``"zero"`` tie-break and to one under ``"unit"``.
    """
    if D > max_degree:
        raise SolverError(f"degree {D} exceeds the configured maximum {max_degree}")
    if tie_break not in TIE_BREAKS:
        raise SolverError(f"unknown tie-break {tie_break!r}")
    log_poly: Dict[Tuple[int, ...], Q] = {}
    for d in range(1, D + 1):
        phi = Associator(d, log_poly, tie_break)
        res = _residual(phi, d)
        basis = freealg.lyndon_basis(2, d)
        cols = {w: _response(L, d) for w, L in basis}
        order = [w for w, _ in basis]
        try:
            x = solve(cols, {k: -v for k, v in res.items()}, order)
        except Inconsistent as e:
            raise SolverError(f"associator equations inconsistent at degree {d}") from e
        if tie_break == "unit":
            for v in kernel(cols, order):
                for w, c in v.items():
                    x[w] = x.get(w, 0) + c
        for w, L in basis:
            c = x.get(w)
            if c:
                log_poly = freealg.add(log_poly, L, c)
    out = Associator(D, log_poly, tie_break)
    return out


# ------------------------------------------------------------- braid moves


@dataclass(frozen=True)
class Move:
    """One elementary move on a parenthesized sequence of strands.

    ``kind == "rot"``: rotation at ``path`` in ``direction`` (``L2R`` for
    ``((A B) C) -> (A (B C))``). ``kind == "cross"``: the two children of
    the node at ``path`` change places; ``sign = +1`` when the left child
    passes over the right one.
    """

    kind: str
    path: Tuple[int, ...]
    direction: str = ""
    sign: int = 1

    @staticmethod
    def rot(path, direction) -> "Move":
        return Move("rot", tuple(path), direction, 1 if direction == LEFT_TO_RIGHT else -1)

    @staticmethod
    def cross(path, sign=1) -> "Move":
        return Move("cross", tuple(path), "", sign)


def apply_move(t: Tree, m: Move) -> Tree:
    if m.kind == "rot":
        return apply_step(t, ReparenthesizationStep(None, m.path, m.direction))
    if m.kind == "cross":
        s = subtree(t, m.path)
        if not isinstance(s, Node):
            raise ChordError("crossing needs an internal node")
        return replace_subtree(t, m.path, Node(s.right, s.left))
    raise ChordError(f"unknown move kind {m.kind!r}")


def braid_to_chord(phi: Associator, start: Tree, moves: Sequence[Move], strands: Optional[Sequence] = None, trunc: Optional[int] = None) -> ChordSeries:
    """Chord series of a parenthesized braid given as moves from ``start``."""
    strands = tuple(leaves(start)) if strands is None else tuple(strands)
    trunc = phi.degree if trunc is None else trunc
    out = ChordSeries.one(strands, trunc)
    t = start
    for m in moves:
        if m.kind == "rot":
            st = ReparenthesizationStep(None, m.path, m.direction)
            X, Y, Z = (leaves(b) for b in rotation_blocks(t, st))
            factor = phi.on_blocks(X, Y, Z, strands, inverse=m.direction == RIGHT_TO_LEFT, trunc=trunc)
        elif m.kind == "cross":
            s = subtree(t, m.path)
            if not isinstance(s, Node):
                raise ChordError("crossing needs an internal node")
            factor = _crossing(strands, leaves(s.left), leaves(s.right), m.sign, trunc)
        else:
            raise ChordError(f"unknown move kind {m.kind!r}")
        out = factor * out
        t = apply_move(t, m)
    return out


def doubled(t: Tree, side: str) -> Tree:
    if t is None:
        return None
    if isinstance(t, Node):
        return Node(doubled(t.left, side), doubled(t.right, side))
    return (t, side)


def fused(t: Tree) -> Tree:
    if t is None:
        return None
    if isinstance(t, Node):
        return Node(fused(t.left), fused(t.right))
    return Node((t, "a"), (t, "b"))


def _start(t: Tree) -> Tree:
    ta, tb = doubled(t, "a"), doubled(t, "b")
    if t is None:
        return None
    return Node(ta, tb)


def _comb_path(length: int, last: int) -> Tuple[int, ...]:
    """Address, in a left comb of ``length`` leaves, of the node ending at leaf ``last``."""
    return (0,) * (length - 1 - last)


def fusion_braid(t: Tree) -> Tuple[Tree, List[Move]]:
    """Moves taking ``(T^a T^b)`` to ``T`` with each leaf ``x`` replaced by ``(x^a x^b)``.

    The pairs are formed by insertion: the state is first combed to the
    left, then for ``k = 1..n`` strand ``k^b`` travels left past the
    a-strands of larger index, each passage being a positive crossing of
    an a-strand over it flanked by rotations. Finally the comb is
    rotated into the fused tree.
    """
    labels = leaves(t)
    n = len(labels)
    start = _start(t)
    if n <= 1:
        return start, []
    moves: List[Move] = []
    cur = start
    for st in _to_left_comb(cur, None):
        moves.append(Move.rot(st.node_path, st.direction))
        cur = apply_step(cur, st)
    order = [(x, "a") for x in labels] + [(x, "b") for x in labels]
    L = len(order)
    for k in range(n):
        p = order.index((labels[k], "b"))
        while p > 0 and order[p - 1][1] == "a" and labels.index(order[p - 1][0]) > k:
            q = p - 1
            if q == 0:
                seq = [Move.cross(_comb_path(L, p), 1)]
            else:
                node = _comb_path(L, p)
                seq = [
                    Move.rot(node, LEFT_TO_RIGHT),
                    Move.cross(node + (1,), 1),
                    Move.rot(node, RIGHT_TO_LEFT),
                ]
            for m in seq:
                cur = apply_move(cur, m)
                moves.append(m)
            order[q], order[p] = order[p], order[q]
            p = q
    target = fused(t)
    for st in reparenthesization_path(cur, target):
        moves.append(Move.rot(st.node_path, st.direction))
        cur = apply_step(cur, st)
    assert cur == target
    return start, moves


def fusion_braid_recursive(t: Tree) -> Tuple[Tree, List[Move]]:
    """An alternative decomposition of the same braid by middle-four interchange."""
    start = _start(t)
    moves: List[Move] = []

    def rec(tree: Tree, path: Tuple[int, ...]):
        if not isinstance(tree, Node):
            return
        moves.extend(
            [
                Move.rot(path, LEFT_TO_RIGHT),
                Move.rot(path + (1,), RIGHT_TO_LEFT),
                Move.cross(path + (1, 0), 1),
                Move.rot(path + (1,), LEFT_TO_RIGHT),
                Move.rot(path, RIGHT_TO_LEFT),
            ]
        )
        rec(tree.left, path + (0,))
        rec(tree.right, path + (1,))

    if t is not None and isinstance(t, Node):
        rec(t, ())
    return start, moves


# ---------------------------------------------------------------- fusion


@dataclass
class FusionElement:
    K: ChordSeries
    tree: Tree

    @property
    def source_tree(self) -> Tree:
        return _start(self.tree)

    @property
    def target_tree(self) -> Tree:
        return fused(self.tree)


def as_strands(labels: Sequence) -> Tuple:
    return tuple((x, "a") for x in labels) + tuple((x, "b") for x in labels)


def _shape(t: Tree, labels: List) -> Tree:
    if t is None:
        return None
    if isinstance(t, Node):
        return Node(_shape(t.left, labels), _shape(t.right, labels))
    labels.append(t)
    return len(labels) - 1


def fusion_element(phi: Associator, t: Tree, trunc: Optional[int] = None) -> FusionElement:
    """``K`` for a parenthesized fiber, on strands ``x^a`` then ``x^b``."""
    trunc = phi.degree if trunc is None else trunc
    labels: List = []
    shape = _shape(t, labels)
    key = ("K", shape, trunc)
    K = phi._cache.get(key)
    if K is None:
        start, moves = fusion_braid(shape)
        K = braid_to_chord(phi, start, moves, as_strands(range(len(labels))), trunc)
        phi._cache[key] = K
    if labels != list(range(len(labels))):
        mapping = {(i, s): (x, s) for i, x in enumerate(labels) for s in "ab"}
        K = K.embed(mapping, as_strands(labels))
    return FusionElement(K, t)


def nu(phi: Associator, p: ParenthesizedOrderedMorphism, trunc: Optional[int] = None, strands: Optional[Sequence] = None) -> ChordSeries:
    """Product of the fusion elements of all fibers of ``p`` on ``I^a`` and ``I^b``."""
    trunc = phi.degree if trunc is None else trunc
    strands = as_strands(p.source.elements) if strands is None else tuple(strands)
    out = ChordSeries.one(strands, trunc)
    for t in p.trees:
        if t is None or not isinstance(t, Node):
            continue
        K = fusion_element(phi, t, trunc).K
        out = out * K.embed({}, strands)
    return out


def higher_associator(
    phi: Associator,
    p: ParenthesizedOrderedMorphism,
    p2: ParenthesizedOrderedMorphism,
    trunc: Optional[int] = None,
    strands: Optional[Sequence] = None,
    relabel=None,
) -> ChordSeries:
    """``Phi^{p,p'}``: rotations along the canonical path, fiber by fiber.

    ``relabel`` maps each source element to the strand label it acts on
    (default: itself).
    """
    if p.base != p2.base:
        raise ChordError("higher associator needs parenthesizations of the same ordered morphism")
    trunc = phi.degree if trunc is None else trunc
    rl = (lambda x: x) if relabel is None else relabel
    strands = tuple(rl(x) for x in p.source.elements) if strands is None else tuple(strands)
    out = ChordSeries.one(strands, trunc)
    for j, t1, t2 in zip(p.target.elements, p.trees, p2.trees):
        t = t1
        for st in reparenthesization_path(t1, t2, j):
            X, Y, Z = (tuple(rl(x) for x in leaves(b)) for b in rotation_blocks(t, st))
            out = phi.on_blocks(X, Y, Z, strands, inverse=st.direction == RIGHT_TO_LEFT, trunc=trunc) * out
            t = apply_step(t, st)
    return out


# ------------------------------------------------------- 2-functoriality


def composable_pairs(max_source: int, max_middle: int = 4, allow_empty: bool = True) -> Iterable[Tuple[ParenthesizedOrderedMorphism, ParenthesizedOrderedMorphism]]:
    """Composable standard-parenthesized pairs ``p: I -> J``, ``q: J -> K``.

    Pairs are enumerated up to relabeling: source elements are numbered
    in composite order, so ``p`` is given by a sequence of fiber sizes
    and ``q`` by a grouping of consecutive ``J``-elements. Empty fibers
    of ``p`` are included when ``allow_empty`` is set.
    """
    from .ordcat import OrderedMorphism, standard_parenthesization

    def compositions(m: int, k: int, lo: int):
        if k == 0:
            if m == 0:
                yield ()
            return
        for s in range(lo, m + 1):
            for rest in compositions(m - s, k - 1, lo):
                yield (s,) + rest

    for m in range(0, max_source + 1):
        for k in range(1, max_middle + 1):
            for sizes in compositions(m, k, 0 if allow_empty else 1):
                I = tuple(f"i{x}" for x in range(m))
                J = tuple(f"j{x}" for x in range(k))
                fib, pos = {}, 0
                for j, s in zip(J, sizes):
                    fib[j] = I[pos : pos + s]
                    pos += s
                p = OrderedMorphism.from_fibers(fib, I)
                for cuts in range(1 << (k - 1)):
                    groups, cur = [], [J[0]]
                    for x in range(1, k):
                        if cuts >> (x - 1) & 1:
                            groups.append(tuple(cur))
                            cur = []
                        cur.append(J[x])
                    groups.append(tuple(cur))
                    q = OrderedMorphism.from_fibers({f"z{x}": g for x, g in enumerate(groups)}, J)
                    yield standard_parenthesization(p), standard_parenthesization(q)


def two_functoriality_residual(phi: Associator, p: ParenthesizedOrderedMorphism, q: ParenthesizedOrderedMorphism, trunc: Optional[int] = None) -> ChordSeries:
    """``nu^{q o p} - nu^p * cable_p(nu^q)`` on the strands ``I^a, I^b``."""
    from .ordcat import compose_parenthesized

    trunc = phi.degree if trunc is None else trunc
    st = as_strands(p.source.elements)
    qp = compose_parenthesized(p, q)
    lhs = nu(phi, qp, trunc, st)
    nq = nu(phi, q, trunc)
    blocks = {}
    for j, f in zip(p.target.elements, p.base.fibers):
        blocks[(j, "a")] = tuple((x, "a") for x in f)
        blocks[(j, "b")] = tuple((x, "b") for x in f)
    rhs = nu(phi, p, trunc, st) * nq.cable_many(blocks).embed({}, st)
    return lhs - rhs
