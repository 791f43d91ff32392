"""Skeletized coloured surfaces and their quantized moduli algebras.

A surface is a ciliated graph whose vertices carry coisotropic colour
subalgebras and whose edges and widowed half-edges carry formal spaces
with Lie algebra actions. Functions on the product space ``X_Gamma``
invariant under the colours form the classical moduli algebra; the
quantized algebra keeps the same invariants and twists the product by
the fusion elements of the incidence maps.

Precision. Everything is computed modulo the weight filtration
``weight(hbar^k x^d) = d + 2k`` cut at ``W = N + 2 D``: the ``hbar^k``
coefficient of any quantity is known up to jet degree ``W - 2k``. Each
chord contributes one ``hbar`` and at most two lost jet degrees, so all
operations respect the filtration and identities hold exactly in the
truncated algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Callable, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from .associator import Associator, higher_associator, nu
from .chords import ChordSeries
from .jets import JetRing, Poly
from .liealg import CasimirElement, LieAlgebra, Subalgebra, is_coisotropic
from .ordcat import (
    OrderedMorphism,
    ParenthesizedOrderedMorphism,
    compose,
    compose_parenthesized,
    standard_parenthesization,
    tree_str,
)
from .parallel import ordered_map, shared
from .rational import Q, q_str
from .spaces import (
    ChordOperator,
    Derivation,
    GSpace,
    SliceLift,
    SpaceError,
    StrandBinding,
    act_chord,
    coisotropic_stabilizers_check,
    invariants,
)

__all__ = [
    "ModuliError",
    "CiliatedGraph",
    "SkeletizedColouredSurface",
    "FactorMap",
    "SurfaceMorphism",
    "XGamma",
    "InvariantBasis",
    "HSeries",
    "QuantAlgebra",
    "QuantModuliAlgebra",
    "TensorQuant",
    "HMap",
    "validate",
    "build_X_Gamma",
    "classical_moduli",
    "quantize",
    "pullback_diagonal",
    "apply_morphism",
    "disjoint_union",
    "empty_surface",
    "tensor_maps",
    "edge_casimir",
]


class ModuliError(ValueError):
    pass


def _same_ordered(p: OrderedMorphism, q: OrderedMorphism) -> bool:
    return (
        set(p.source.elements) == set(q.source.elements)
        and p.target.elements == q.target.elements
        and p.fibers == q.fibers
    )


# ----------------------------------------------------------------- graphs


@dataclass
class CiliatedGraph:
    """Vertices and half-edges of both signs, edges joining ``+`` to ``-``.

    ``i_plus`` and ``i_minus`` send half-edges to vertices; their ordered
    fibers are the cilia orders. ``h_plus[e]`` and ``h_minus[e]`` are the
    two half-edges of the edge ``e``.
    """

    V_plus: Tuple[str, ...]
    V_minus: Tuple[str, ...]
    H_plus: Tuple[str, ...]
    H_minus: Tuple[str, ...]
    E: Tuple[str, ...]
    i_plus: OrderedMorphism
    i_minus: OrderedMorphism
    h_plus: Dict[str, str]
    h_minus: Dict[str, str]

    @classmethod
    def build(
        cls,
        cilia_plus: Optional[Mapping[str, Sequence[str]]] = None,
        cilia_minus: Optional[Mapping[str, Sequence[str]]] = None,
        edges: Optional[Mapping[str, Tuple[str, str]]] = None,
    ) -> "CiliatedGraph":
        cilia_plus = dict(cilia_plus or {})
        cilia_minus = dict(cilia_minus or {})
        edges = dict(edges or {})
        Vp, Vm = tuple(cilia_plus), tuple(cilia_minus)
        Hp = tuple(h for v in Vp for h in cilia_plus[v])
        Hm = tuple(h for v in Vm for h in cilia_minus[v])
        ip = OrderedMorphism.from_fibers({v: tuple(cilia_plus[v]) for v in Vp}, Hp)
        im = OrderedMorphism.from_fibers({v: tuple(cilia_minus[v]) for v in Vm}, Hm)
        return cls(Vp, Vm, Hp, Hm, tuple(edges), ip, im, {e: a for e, (a, _) in edges.items()}, {e: b for e, (_, b) in edges.items()})

    @property
    def vertices(self) -> Tuple[str, ...]:
        return self.V_plus + self.V_minus

    @property
    def half_edges(self) -> Tuple[str, ...]:
        return self.H_plus + self.H_minus

    def sign(self, h: str) -> int:
        return 1 if h in self.H_plus else -1

    def vertex_sign(self, v: str) -> int:
        return 1 if v in self.V_plus else -1

    def fiber(self, v: str) -> Tuple[str, ...]:
        return self.i_plus.fiber(v) if v in self.V_plus else self.i_minus.fiber(v)

    def vertex_of(self, h: str) -> str:
        return self.i_plus(h) if h in self.H_plus else self.i_minus(h)

    def edge_of(self, h: str) -> Optional[str]:
        for e in self.E:
            if self.h_plus[e] == h or self.h_minus[e] == h:
                return e
        return None

    @property
    def widowed_plus(self) -> Tuple[str, ...]:
        used = set(self.h_plus.values())
        return tuple(h for h in self.H_plus if h not in used)

    @property
    def widowed_minus(self) -> Tuple[str, ...]:
        used = set(self.h_minus.values())
        return tuple(h for h in self.H_minus if h not in used)

    @property
    def factors(self) -> Tuple[str, ...]:
        """Labels of the factors of ``X_Gamma``: edges, then widowed half-edges."""
        return self.E + self.widowed_plus + self.widowed_minus

    def factor_of(self, h: str) -> str:
        e = self.edge_of(h)
        return h if e is None else e

    def diagnostics(self) -> List[str]:
        out = []
        labels = list(self.vertices) + list(self.half_edges) + list(self.E)
        dup = sorted({x for x in labels if labels.count(x) > 1})
        if dup:
            out.append(f"labels used twice: {', '.join(dup)}")
        for sign, V, i in (("+", self.V_plus, self.i_plus), ("-", self.V_minus, self.i_minus)):
            for v in V:
                if not i.fiber(v):
                    out.append(f"i_{sign} is not surjective: vertex {v} has no half-edges")
        for e in self.E:
            if e not in self.h_plus or e not in self.h_minus:
                out.append(f"edge {e} lacks a half-edge")
                continue
            if self.h_plus[e] not in self.H_plus:
                out.append(f"edge {e}: {self.h_plus[e]} is not a positive half-edge")
            if self.h_minus[e] not in self.H_minus:
                out.append(f"edge {e}: {self.h_minus[e]} is not a negative half-edge")
        for name, h in (("h_+", self.h_plus), ("h_-", self.h_minus)):
            vals = list(h.values())
            if len(set(vals)) != len(vals):
                out.append(f"{name} is not injective")
        return out

    def render(self) -> str:
        """Vertices with their cilia in order, then edges."""
        lines = []
        for v in self.vertices:
            s = "+" if v in self.V_plus else "-"
            cil = " < ".join(self.fiber(v))
            lines.append(f"({v}){s} cilia: {cil}" if cil else f"({v}){s}")
        for e in self.E:
            lines.append(f"{e}: {self.h_plus[e]} ==== {self.h_minus[e]}")
        return "\n".join(lines)


def edge_casimir(t: Mapping[Tuple[int, int], Q], dim: int) -> Dict[Tuple[int, int], Q]:
    """``t + (-t)`` on ``g + gbar`` (indices of ``gbar`` shifted by ``dim``)."""
    out = {}
    for (a, b), c in t.items():
        out[(a, b)] = c
        out[(dim + a, dim + b)] = -c
    return out


# --------------------------------------------------------------- surfaces


@dataclass
class SkeletizedColouredSurface:
    """A ciliated graph with colours and spaces.

    ``spaces`` maps each factor label (edge or widowed half-edge) to a
    :class:`GSpace`. Edge spaces carry ``2 dim g`` fields: the ``g`` part
    for the positive half-edge followed by the ``gbar`` part for the
    negative one. ``slices`` optionally names, per vertex, a factor and
    block on which the colour acts simply transitively.
    """

    graph: CiliatedGraph
    g: LieAlgebra
    t: CasimirElement
    colours: Dict[str, Subalgebra]
    spaces: Dict[str, GSpace]
    trees_plus: Optional[ParenthesizedOrderedMorphism] = None
    trees_minus: Optional[ParenthesizedOrderedMorphism] = None
    slices: Dict[str, Tuple[str, str]] = field(default_factory=dict)
    name: str = "Gamma"
    components: Tuple[Tuple[str, "SkeletizedColouredSurface"], ...] = ()

    def __post_init__(self):
        if self.trees_plus is None:
            self.trees_plus = standard_parenthesization(self.graph.i_plus)
        if self.trees_minus is None:
            self.trees_minus = standard_parenthesization(self.graph.i_minus)

    @property
    def dim(self) -> int:
        return self.g.dim

    def describe(self) -> Dict:
        G = self.graph
        return {
            "name": self.name,
            "vertices_plus": list(G.V_plus),
            "vertices_minus": list(G.V_minus),
            "cilia": {v: list(G.fiber(v)) for v in G.vertices},
            "edges": {e: [G.h_plus[e], G.h_minus[e]] for e in G.E},
            "colours": {v: [[q_str(c.get(k, 0)) for k in range(self.dim)] for c in self.colours[v].basis()] for v in G.vertices if v in self.colours},
            "parenthesization_plus": [tree_str(t) for t in self.trees_plus.trees],
            "parenthesization_minus": [tree_str(t) for t in self.trees_minus.trees],
        }


def validate(G: SkeletizedColouredSurface) -> List[str]:
    """Diagnostics naming each failing datum (empty when valid)."""
    out = list(G.graph.diagnostics())
    gr = G.graph
    n = G.dim
    for v in gr.vertices:
        c = G.colours.get(v)
        if c is None:
            out.append(f"vertex {v} has no colour")
            continue
        if c.closure_witness() is not None:
            out.append(f"colour of vertex {v} is not a subalgebra")
        elif not is_coisotropic(c, G.t):
            out.append(f"colour of vertex {v} is not coisotropic")
    expected = set(gr.factors)
    for f in expected - set(G.spaces):
        out.append(f"factor {f} has no space")
    for f in set(G.spaces) - expected:
        out.append(f"space given for {f}, which is not an edge or widowed half-edge")
    for f in gr.factors:
        sp = G.spaces.get(f)
        if sp is None:
            continue
        if f in gr.E:
            if sp.dim != 2 * n:
                out.append(f"edge {f}: space must carry a g + gbar action")
                continue
            w = coisotropic_stabilizers_check(sp, edge_casimir(G.t.t, n))
        else:
            if sp.dim != n:
                out.append(f"half-edge {f}: space must carry a g action")
                continue
            t = G.t.t if gr.sign(f) > 0 else {k: -c for k, c in G.t.t.items()}
            w = coisotropic_stabilizers_check(sp, t)
        if w is not None:
            out.append(f"space of {f} has non-coisotropic stabilizers: {w}")
    for sign, tr, i in (("+", G.trees_plus, gr.i_plus), ("-", G.trees_minus, gr.i_minus)):
        if not _same_ordered(tr.base, i):
            out.append(f"parenthesization of i_{sign} does not match the cilia order")
    for v, (f, blk) in G.slices.items():
        if f not in G.spaces or blk not in G.spaces[f].blocks:
            out.append(f"slice hint for vertex {v} names an unknown factor block")
    return out


# ---------------------------------------------------------------- X_Gamma


@dataclass
class XGamma:
    """The product space with one family of fields per half-edge strand."""

    ring: JetRing
    factors: Tuple[str, ...]
    coords: Dict[str, List[int]]
    blocks: Dict[str, Dict[str, List[int]]]
    strand_fields: Dict[str, Tuple[Derivation, ...]]
    strand_sign: Dict[str, int]
    strand_factor: Dict[str, str]
    colour_fields: Dict[str, List[Derivation]]

    def space(self, strands: Sequence[str]) -> GSpace:
        fields = [D for h in strands for D in self.strand_fields[h]]
        return GSpace(self.ring, len(fields), fields, "X_Gamma", {f: tuple(ix) for f, ix in self.coords.items()})


def build_X_Gamma(G: SkeletizedColouredSurface, order: int) -> XGamma:
    gr = G.graph
    n = G.dim
    names: List[str] = []
    coords: Dict[str, List[int]] = {}
    for f in gr.factors:
        sp = G.spaces[f]
        coords[f] = list(range(len(names), len(names) + sp.ring.n))
        names.extend(f"{f}.{nm}" for nm in sp.ring.names)
    R = JetRing(names, order)
    blocks = {f: {b: [coords[f][i] for i in ix] for b, ix in G.spaces[f].blocks.items()} for f in gr.factors}
    strand_fields: Dict[str, Tuple[Derivation, ...]] = {}
    strand_factor: Dict[str, str] = {}
    for f in gr.factors:
        sp = G.spaces[f]
        fields = [D.transport(R, coords[f]) for D in sp.fields]
        if f in gr.E:
            strand_fields[gr.h_plus[f]] = tuple(fields[:n])
            strand_fields[gr.h_minus[f]] = tuple(fields[n:])
            strand_factor[gr.h_plus[f]] = f
            strand_factor[gr.h_minus[f]] = f
        else:
            strand_fields[f] = tuple(fields)
            strand_factor[f] = f
    colour_fields: Dict[str, List[Derivation]] = {}
    for v in gr.vertices:
        fields = []
        for xi in G.colours[v].basis():
            acc = Derivation(R, {}, order)
            for h in gr.fiber(v):
                for a, c in xi.items():
                    acc = acc.combine(strand_fields[h][a], c)
            fields.append(acc)
        colour_fields[v] = fields
    signs = {h: gr.sign(h) for h in gr.half_edges}
    return XGamma(R, gr.factors, coords, blocks, strand_fields, signs, strand_factor, colour_fields)


# -------------------------------------------------------------- invariants


def _constant_matrix(fields: Sequence[Derivation], idx: Sequence[int]) -> List[List[Q]]:
    return [[Q(D.coeffs.get(i, {}).get(0, 0)) for i in idx] for D in fields]


def _nonsingular(M: List[List[Q]]) -> bool:
    n = len(M)
    if any(len(r) != n for r in M):
        return False
    A = [list(r) for r in M]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c]), None)
        if p is None:
            return False
        A[c], A[p] = A[p], A[c]
        for r in range(c + 1, n):
            if A[r][c]:
                f = A[r][c] / A[c][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return True


def find_slices(G: SkeletizedColouredSurface, X: XGamma) -> Optional[Dict[str, List[int]]]:
    """Coordinates on which each colour acts simply transitively, if any.

    Candidates are the blocks of factors incident to the vertex, tried
    from the last cilium backwards; a block qualifies when the colour's
    fields are invertible on it at the origin and no other colour moves it.
    """
    gr = G.graph
    chosen: Dict[str, List[int]] = {}
    used: set = set()
    for v in gr.vertices:
        fields = X.colour_fields[v]
        if not fields:
            continue
        cands: List[List[int]] = []
        if v in G.slices:
            f, b = G.slices[v]
            cands.append(X.blocks[f][b])
        for h in reversed(gr.fiber(v)):
            f = X.strand_factor[h]
            for b in X.blocks[f]:
                cands.append(X.blocks[f][b])
        found = None
        for idx in cands:
            if len(idx) != len(fields) or used.intersection(idx):
                continue
            if not _nonsingular(_constant_matrix(fields, idx)):
                continue
            others = [D for w in gr.vertices if w != v for D in X.colour_fields[w]]
            if any(i in D.coeffs for D in others for i in idx):
                continue
            found = list(idx)
            break
        if found is None:
            return None
        chosen[v] = found
        used.update(found)
    return chosen


class InvariantBasis:
    """A basis of colour-invariant jets indexed by their free monomials.

    Every basis jet equals its free monomial plus non-free monomials, so
    the coordinates of an invariant jet are its coefficients on the free
    monomials. With a slice the non-free monomials are exactly those
    involving slice coordinates, and restriction to the slice is a ring
    map; otherwise the basis comes from an exact kernel computation.
    """

    def __init__(self, X: XGamma, order: int, slices: Optional[Dict[str, List[int]]]):
        self.X = X
        self.R = X.ring
        self.order = order
        colour_fields = [D for fs in X.colour_fields.values() for D in fs]
        self._lifts: Dict[int, Poly] = {}
        if not colour_fields:
            self.kind = "free"
            self.kept = list(range(self.R.n))
            self.free = [m for m in self.R.monomials if self.R.deg[m] <= order]
        elif slices is not None:
            self.kind = "slice"
            sl = [(X.colour_fields[v], ys) for v, ys in slices.items()]
            self.lifter = SliceLift(self.R, sl, order)
            sset = set(self.lifter.slice)
            self.kept = [i for i in range(self.R.n) if i not in sset]
            self.free = self.lifter.slice_monomials(order)
        else:
            self.kind = "kernel"
            self.kept = list(range(self.R.n))
            vecs = invariants(self.R, colour_fields, order)
            self.free = []
            for v in vecs:
                m = min(v, key=lambda c: (self.R.deg[c], c))
                self.free.append(m)
                self._lifts[len(self.free) - 1] = v
            order_key = {m: i for i, m in enumerate(self.R.monomials)}
            perm = sorted(range(len(self.free)), key=lambda i: (self.R.deg[self.free[i]], order_key[self.free[i]]))
            self.free = [self.free[i] for i in perm]
            self._lifts = {j: self._lifts[i] for j, i in enumerate(perm)}
        self.index = {m: i for i, m in enumerate(self.free)}
        self.degrees = [self.R.deg[m] for m in self.free]
        self.kept_ring = JetRing([self.R.names[i] for i in self.kept], order)
        self._restrict_map = [self.kept.index(i) if i in self.kept else None for i in range(self.R.n)]
        tr = self.R.rename_map(self.kept_ring, self._restrict_map)
        self.kept_index = {tr(m): i for i, m in enumerate(self.free)}

    def __len__(self):
        return len(self.free)

    @property
    def restriction(self) -> List[Optional[int]]:
        """Coordinate map from ``X_Gamma`` to the kept ring (``None`` drops)."""
        return list(self._restrict_map)

    def lift(self, i: int) -> Poly:
        hit = self._lifts.get(i)
        if hit is None:
            if self.kind == "free":
                hit = {self.free[i]: Q(1)}
            else:
                hit = self.lifter.lift({self.free[i]: Q(1)}, self.order)
            self._lifts[i] = hit
        return hit

    def labels(self) -> List[str]:
        return [self.kept_ring.fmt({self.R.rename_map(self.kept_ring, self._restrict_map)(m): 1}).replace("1*", "", 1) if self.R.deg[m] else "1" for m in self.free]


# ---------------------------------------------------------- graded linear data

HSeries = List[Dict[int, Q]]


def _hzero(D: int) -> HSeries:
    return [dict() for _ in range(D + 1)]


def _iadd(y: Dict[int, Q], x: Mapping[int, Q], c=1) -> None:
    for k, v in x.items():
        s = y.get(k, 0) + c * v
        if s:
            y[k] = s
        else:
            y.pop(k, None)


class QuantAlgebra:
    """Common interface: graded basis, star constants, truncation data."""

    D: int
    N: int
    W: int
    degrees: List[int]

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def star(self, i: int, j: int) -> HSeries:
        raise NotImplementedError

    def unit_index(self) -> int:
        return self.degrees.index(0)

    def basis_element(self, i: int) -> HSeries:
        x = _hzero(self.D)
        x[0][i] = Q(1)
        return x

    def clip(self, x: HSeries) -> HSeries:
        W, deg = self.W, self.degrees
        return [{i: c for i, c in xk.items() if c and deg[i] <= W - 2 * k} for k, xk in enumerate(x)]

    def product(self, x: HSeries, y: HSeries) -> HSeries:
        D, W, deg = self.D, self.W, self.degrees
        out = _hzero(D)
        for k1, xk in enumerate(x):
            for i, a in xk.items():
                for k2 in range(D + 1 - k1):
                    for j, b in y[k2].items():
                        if deg[i] + deg[j] > W - 2 * (k1 + k2):
                            continue
                        s = self.star(i, j)
                        for k3 in range(D + 1 - k1 - k2):
                            lim = W - 2 * (k1 + k2 + k3)
                            for l, c in s[k3].items():
                                if deg[l] <= lim:
                                    _iadd(out[k1 + k2 + k3], {l: a * b * c})
        return out

    def parts(self) -> List["QuantModuliAlgebra"]:
        raise NotImplementedError


@dataclass
class HMap:
    """A K[[hbar]]-linear map: ``cols[i][k]`` is the ``hbar^k`` part of the image of basis ``i``."""

    src: QuantAlgebra
    tgt: QuantAlgebra
    cols: List[HSeries]

    @property
    def D(self) -> int:
        return self.tgt.D

    def apply(self, x: HSeries) -> HSeries:
        D, W, deg = self.D, self.tgt.W, self.tgt.degrees
        out = _hzero(D)
        for k1, xk in enumerate(x):
            for i, a in xk.items():
                col = self.cols[i]
                for k2 in range(D + 1 - k1):
                    lim = W - 2 * (k1 + k2)
                    for l, c in col[k2].items():
                        if deg[l] <= lim:
                            _iadd(out[k1 + k2], {l: a * c})
        return out

    def compose(self, first: "HMap") -> "HMap":
        """``self o first``."""
        return HMap(first.src, self.tgt, [self.apply(c) for c in first.cols])

    def __eq__(self, other) -> bool:
        return isinstance(other, HMap) and self.cols == other.cols

    def difference(self, other: "HMap") -> List[Tuple[int, int, Dict]]:
        out = []
        for i, (a, b) in enumerate(zip(self.cols, other.cols)):
            for k in range(len(a)):
                d = dict(a[k])
                _iadd(d, b[k], -1)
                if d:
                    out.append((i, k, d))
        return out

    def matrices(self) -> List[Dict[str, Dict[str, str]]]:
        """Per hbar-degree sparse matrices with exact rational entries."""
        out = []
        for k in range(self.D + 1):
            m = {}
            for i, col in enumerate(self.cols):
                if col[k]:
                    m[str(i)] = {str(l): q_str(c) for l, c in sorted(col[k].items())}
            out.append(m)
        return out

    @classmethod
    def identity(cls, A: QuantAlgebra) -> "HMap":
        return cls(A, A, [A.basis_element(i) for i in range(A.dim)])


# ------------------------------------------------------ operator evaluation


class OperatorEvaluator:
    """Evaluate ``m o (chord operator)`` on tensors of basis jets.

    Slot ``s`` of the operator acts on the lift of a basis element of
    ``sources[s]``; the results are pulled back into ``out_ring`` by
    ``pullbacks[s]`` and multiplied. Terms are arranged in a trie over
    the slots so that partial sums are shared, and derivative
    applications are memoized on (source, basis index, sequence).
    """

    def __init__(
        self,
        op: ChordOperator,
        sources: Sequence[Tuple[str, Callable[[int], Poly], JetRing]],
        pullbacks: Sequence[Callable[[Poly, int], Poly]],
        out_ring: JetRing,
        W: int,
        D: int,
        field_keys: Optional[Mapping[Hashable, Hashable]] = None,
    ):
        self.op = op
        self.sources = list(sources)
        self.pullbacks = list(pullbacks)
        self.out = out_ring
        self.W, self.D = W, D
        self.nslots = len(self.sources)
        keys = dict(field_keys or {})
        self.fields: Dict[Hashable, Tuple[Derivation, ...]] = {}
        self.key_of: Dict[Hashable, Hashable] = {}
        for s, b in op.bindings.items():
            k = keys.get(s, s)
            self.key_of[s] = k
            self.fields[k] = b.fields
        self.tries: List[dict] = []
        for k in range(D + 1):
            trie: dict = {}
            for seqs, c in op.by_degree(k):
                flat = [self._flat(seqs[s]) if s < len(seqs) else () for s in range(self.nslots)]
                node = trie
                for s in range(self.nslots - 1):
                    node = node.setdefault(flat[s], {})
                last = flat[-1] if self.nslots else ()
                node[last] = node.get(last, 0) + c
            self.tries.append(trie)
        self._full: Dict[Tuple, Poly] = {}
        self._pb: Dict[Tuple, Poly] = {}

    def _flat(self, slot_seq) -> Tuple:
        return tuple((self.key_of[s], a) for s, idxs in slot_seq for a in idxs)

    def _apply(self, s: int, i: int, flat: Tuple) -> Poly:
        name, lift, R = self.sources[s]
        key = (name, i, flat)
        hit = self._full.get(key)
        if hit is not None:
            return hit
        if not flat:
            res = lift(i)
        else:
            inner = self._apply(s, i, flat[1:])
            fk, a = flat[0]
            res = self.fields[fk][a](inner, self.W - len(flat)) if inner else {}
        self._full[key] = res
        return res

    def _piece(self, s: int, i: int, flat: Tuple) -> Poly:
        key = (s, i, flat)
        hit = self._pb.get(key)
        if hit is None:
            full = self._apply(s, i, flat)
            hit = self.pullbacks[s](full, self.W - len(flat)) if full else {}
            self._pb[key] = hit
        return hit

    def image(self, idx: Sequence[int]) -> List[Poly]:
        out: List[Poly] = []
        for k, trie in enumerate(self.tries):
            lim = self.W - 2 * k
            out.append(self._eval(trie, 0, idx, lim) if trie and lim >= 0 else {})
        return out

    def _eval(self, node: dict, s: int, idx: Sequence[int], lim: int) -> Poly:
        R = self.out
        acc: Poly = {}
        if self.nslots == 0:
            c = node.get((), 0)
            return R.const(c) if c else {}
        last = s == self.nslots - 1
        for flat, child in node.items():
            piece = self._piece(s, idx[s], flat)
            if not piece:
                continue
            if last:
                R.iadd(acc, R.truncate(piece, lim), child)
            else:
                rest = self._eval(child, s + 1, idx, lim)
                if rest:
                    R.iadd(acc, R.mul(piece, rest, lim))
        return acc


def _evaluate_cells(cell_indices):
    ev, coords = shared("moduli.evaluator"), shared("moduli.coords")
    out = []
    for idx in cell_indices:
        img = ev.image(idx)
        out.append([coords(p) for p in img])
    return out


def _run_cells(ev: OperatorEvaluator, coords: Callable[[Poly], Dict[int, Q]], cells: Sequence[Tuple[int, ...]], workers: int) -> List[HSeries]:
    chunk = 8
    batches = [tuple(cells[i : i + chunk]) for i in range(0, len(cells), chunk)]
    res = ordered_map(_evaluate_cells, batches, workers, {"moduli.evaluator": ev, "moduli.coords": coords})
    return [x for b in res for x in b]


# ----------------------------------------------------------- quantization


@dataclass
class QuantContext:
    surface: SkeletizedColouredSurface
    X: XGamma
    basis: InvariantBasis


class QuantModuliAlgebra(QuantAlgebra):
    """Invariant basis and star constants of one surface."""

    def __init__(
        self,
        ctx: QuantContext,
        D: int,
        N: int,
        star: Dict[Tuple[int, int], HSeries],
        associator_id: str,
        evaluator: Optional[OperatorEvaluator] = None,
        coords: Optional[Callable[[Poly], Dict[int, Q]]] = None,
    ):
        self.ctx = ctx
        self.D, self.N, self.W = D, N, N + 2 * D
        self.degrees = list(ctx.basis.degrees)
        self.star_table = star
        self.associator_id = associator_id
        self._ev = evaluator
        self._coords = coords

    def complete(self, workers: int = 1) -> "QuantModuliAlgebra":
        """Compute every missing structure constant."""
        missing = [pq for pq in _sorted_pairs(self.degrees, self.W) if pq not in self.star_table]
        if missing:
            res = _run_cells(self._ev, self._coords, missing, workers)
            self.star_table.update(zip(missing, res))
        return self

    @property
    def name(self) -> str:
        return self.ctx.surface.name

    def parts(self) -> List["QuantModuliAlgebra"]:
        return [self]

    def star(self, i: int, j: int) -> HSeries:
        if self.degrees[i] + self.degrees[j] > self.W:
            return _hzero(self.D)
        hit = self.star_table.get((i, j))
        if hit is None:
            img = self._ev.image((i, j))
            hit = self.star_table[(i, j)] = [self._coords(p) for p in img]
        return hit

    def labels(self) -> List[str]:
        return self.ctx.basis.labels()

    def to_json_obj(self) -> Dict:
        self.complete()
        return {
            "surface": self.ctx.surface.describe(),
            "truncation": {"hbar_degree": self.D, "jet_order": self.N, "weight": self.W},
            "associator": self.associator_id,
            "invariants": self.ctx.basis.kind,
            "basis": self.labels(),
            "degrees": self.degrees,
            "star": {
                f"{i},{j}": [{str(l): q_str(c) for l, c in sorted(s[k].items())} for k in range(self.D + 1)]
                for (i, j), s in sorted(self.star_table.items())
            },
        }


class TensorQuant(QuantAlgebra):
    """Completed tensor product of quantized algebras, truncated by weight."""

    def __init__(self, parts: Sequence[QuantAlgebra]):
        flat: List[QuantModuliAlgebra] = []
        for p in parts:
            flat.extend(p.parts())
        if not flat:
            raise ModuliError("a tensor product needs at least one factor")
        self._parts = flat
        self.D, self.N, self.W = flat[0].D, flat[0].N, flat[0].W
        for p in flat:
            if (p.D, p.W) != (self.D, self.W):
                raise ModuliError("tensor factors must share the truncation")
        tuples = [t for t in iproduct(*[range(p.dim) for p in flat]) if sum(p.degrees[i] for p, i in zip(flat, t)) <= self.W]
        tuples.sort(key=lambda t: (sum(p.degrees[i] for p, i in zip(flat, t)), t))
        self.tuples = tuples
        self.index = {t: i for i, t in enumerate(tuples)}
        self.degrees = [sum(p.degrees[i] for p, i in zip(flat, t)) for t in tuples]
        self._star: Dict[Tuple[int, int], HSeries] = {}

    def parts(self) -> List[QuantModuliAlgebra]:
        return list(self._parts)

    def star(self, i: int, j: int) -> HSeries:
        key = (i, j)
        hit = self._star.get(key)
        if hit is not None:
            return hit
        D, W = self.D, self.W
        ti, tj = self.tuples[i], self.tuples[j]
        cur: Dict[Tuple[int, Tuple[int, ...]], Q] = {(0, ()): Q(1)}
        for p, a, b in zip(self._parts, ti, tj):
            s = p.star(a, b)
            nxt: Dict[Tuple[int, Tuple[int, ...]], Q] = {}
            for (k, pre), c in cur.items():
                for k2 in range(D + 1 - k):
                    for l, v in s[k2].items():
                        key2 = (k + k2, pre + (l,))
                        nxt[key2] = nxt.get(key2, 0) + c * v
            cur = {x: v for x, v in nxt.items() if v}
        out = _hzero(D)
        for (k, t), c in cur.items():
            idx = self.index.get(t)
            if idx is not None and self.degrees[idx] <= W - 2 * k:
                _iadd(out[k], {idx: c})
        self._star[key] = out
        return out


def _sorted_pairs(degrees: Sequence[int], W: int) -> List[Tuple[int, int]]:
    n = len(degrees)
    return [(i, j) for i in range(n) for j in range(n) if degrees[i] + degrees[j] <= W]


def _context(G: SkeletizedColouredSurface, W: int) -> QuantContext:
    diag = validate(G)
    if diag:
        raise ModuliError("; ".join(diag))
    X = build_X_Gamma(G, W)
    slices = find_slices(G, X)
    return QuantContext(G, X, InvariantBasis(X, W, slices))


def classical_moduli(G: SkeletizedColouredSurface, degree: int) -> QuantModuliAlgebra:
    """Invariant jets with the restricted classical product (no hbar)."""
    ctx = _context(G, degree)
    return _quantize_ctx(ctx, None, 0, degree, workers=1, lazy=False)


def quantize(
    G: SkeletizedColouredSurface,
    phi: Associator,
    D: int,
    N: int,
    workers: int = 1,
    split: bool = True,
    lazy: bool = False,
) -> QuantAlgebra:
    """The quantized moduli algebra truncated at ``hbar^D`` and weight ``N + 2D``.

    A disjoint union is quantized factorwise (the quantization is
    monoidal) unless ``split`` is false. With ``lazy`` the structure
    constants are computed on first use.
    """
    if D > phi.degree:
        raise ModuliError(f"associator degree {phi.degree} is below the requested hbar degree {D}")
    if split and G.components:
        return TensorQuant([quantize(c, phi, D, N, workers, lazy=lazy) for _, c in G.components])
    ctx = _context(G, N + 2 * D)
    return _quantize_ctx(ctx, phi, D, N, workers, lazy)


def _doubled_nu(G: SkeletizedColouredSurface, phi: Optional[Associator], D: int) -> Tuple[ChordSeries, Tuple]:
    gr = G.graph
    strands = tuple((h, "a") for h in gr.half_edges) + tuple((h, "b") for h in gr.half_edges)
    if phi is None or D == 0:
        return ChordSeries.one(strands, D), strands
    out = ChordSeries.one(strands, D)
    for tr in (G.trees_plus, G.trees_minus):
        out = out * nu(phi, tr, D, strands)
    return out, strands


def _quantize_ctx(ctx: QuantContext, phi: Optional[Associator], D: int, N: int, workers: int, lazy: bool) -> QuantModuliAlgebra:
    G, X, B = ctx.surface, ctx.X, ctx.basis
    W = N + 2 * D
    series, strands = _doubled_nu(G, phi, D)
    bindings = {}
    keys = {}
    for h, side in strands:
        bindings[(h, side)] = StrandBinding(0 if side == "a" else 1, X.strand_fields[h], X.strand_sign[h])
        keys[(h, side)] = h
    op = act_chord(series, bindings, G.t.t)
    if op.nslots < 2:
        op.nslots = 2
    restrict = B.restriction
    R, K = X.ring, B.kept_ring
    tr = R.rename_map(K, restrict)

    def pb(f: Poly, order: int) -> Poly:
        return R.rename(f, K, restrict, order, tr)

    ev = OperatorEvaluator(op, [("X", B.lift, R), ("X", B.lift, R)], [pb, pb], K, W, D, keys)
    index = B.kept_index

    def coords(p: Poly) -> Dict[int, Q]:
        return {index[c]: v for c, v in p.items() if c in index}

    A = QuantModuliAlgebra(ctx, D, N, {}, phi.ident if phi is not None else "classical", ev, coords)
    return A if lazy else A.complete(workers)


# ------------------------------------------------------------- morphisms


@dataclass
class FactorMap:
    """The equivariant map ``X_e <- X'_{target}`` as a pullback of coordinates.

    ``images`` maps each coordinate name of the source factor to a jet in
    the target factor's ring; ``None`` means the coordinates correspond
    by position.
    """

    target: str
    images: Optional[Dict[str, Poly]] = None


@dataclass
class SurfaceMorphism:
    source: SkeletizedColouredSurface
    target: SkeletizedColouredSurface
    phi_V_plus: OrderedMorphism
    phi_V_minus: OrderedMorphism
    phi_H_plus: OrderedMorphism
    phi_H_minus: OrderedMorphism
    phi_E: Dict[str, str] = field(default_factory=dict)
    factor_maps: Dict[str, FactorMap] = field(default_factory=dict)
    name: str = "phi"

    def factor_map(self, f: str) -> FactorMap:
        hit = self.factor_maps.get(f)
        if hit is not None:
            return hit
        gr, gt = self.source.graph, self.target.graph
        if f in gr.E:
            return FactorMap(self.phi_E[f])
        h = f
        h2 = (self.phi_H_plus if gr.sign(h) > 0 else self.phi_H_minus)(h)
        if gt.edge_of(h2) is not None:
            raise ModuliError(f"factor {f}: a map from the edge space of {h2} must be given explicitly")
        return FactorMap(h2)

    def diagnostics(self) -> List[str]:
        out = []
        gs, gt = self.source.graph, self.target.graph
        for sign, i_s, i_t, pV, pH in (
            ("+", gs.i_plus, gt.i_plus, self.phi_V_plus, self.phi_H_plus),
            ("-", gs.i_minus, gt.i_minus, self.phi_V_minus, self.phi_H_minus),
        ):
            try:
                lhs, rhs = compose(i_s, pV), compose(pH, i_t)
            except Exception as exc:
                out.append(f"{sign}: maps are not composable ({exc})")
                continue
            if not _same_ordered(lhs, rhs):
                out.append(f"{sign}: naturality square for i_{sign} fails as ordered morphisms")
        for e in gs.E:
            e2 = self.phi_E.get(e)
            if e2 is None or e2 not in gt.E:
                out.append(f"edge {e} has no image edge")
                continue
            if self.phi_H_plus(gs.h_plus[e]) != gt.h_plus[e2] or self.phi_H_minus(gs.h_minus[e]) != gt.h_minus[e2]:
                out.append(f"edge {e}: half-edge maps do not commute with h_+ and h_-")
        for v in gs.vertices:
            pv = self.phi_V_plus if v in gs.V_plus else self.phi_V_minus
            c_src, c_tgt = self.source.colours[v], self.target.colours[pv(v)]
            E = c_src.echelon()
            for xi in c_tgt.span:
                if E.reduce(xi):
                    out.append(f"colour of {pv(v)} is not contained in the colour of {v}")
                    break
        return out


def _factor_pullback_images(m: SurfaceMorphism, f: str, R_src_factor: JetRing, R_tgt_factor: JetRing) -> List[Poly]:
    """Images of the source factor's coordinates as jets on the target factor."""
    fm = m.factor_map(f)
    if fm.images is None:
        if R_src_factor.n != R_tgt_factor.n:
            raise ModuliError(f"factor {f}: positional identification needs equal dimensions")
        return [R_tgt_factor.var(i) for i in range(R_src_factor.n)]
    return [dict(fm.images[nm]) for nm in R_src_factor.names]


def _components(G: SkeletizedColouredSurface) -> List[Tuple[str, SkeletizedColouredSurface]]:
    return list(G.components) if G.components else [("", G)]


def _split_label(comps, label: str) -> Tuple[int, str]:
    for s, (pre, _) in enumerate(comps):
        if pre and label.startswith(pre):
            return s, label[len(pre) :]
        if not pre:
            return s, label
    raise ModuliError(f"label {label} does not belong to any component")


def pullback_diagonal(m: SurfaceMorphism, order: int) -> Tuple[JetRing, JetRing, List[Poly]]:
    """The diagonal pullback ``O(X_Gamma) -> O(X'_Gamma')`` on coordinates.

    Returns the two rings and the image of each coordinate of
    ``X_Gamma``; a function pulls back by substitution.
    """
    Xs = build_X_Gamma(m.source, order)
    Xt = build_X_Gamma(m.target, order)
    images: List[Poly] = [None] * Xs.ring.n  # type: ignore
    for f in m.source.graph.factors:
        fm = m.factor_map(f)
        sp_s, sp_t = m.source.spaces[f], m.target.spaces[fm.target]
        ims = _factor_pullback_images(m, f, sp_s.ring, sp_t.ring)
        for j, im in zip(Xs.coords[f], ims):
            images[j] = sp_t.ring.rename(im, Xt.ring, Xt.coords[fm.target])
    return Xs.ring, Xt.ring, images


def _higher_associator_for(m: SurfaceMorphism, phi: Associator, D: int, strands: Tuple[str, ...]) -> ChordSeries:
    out = ChordSeries.one(strands, D)
    for i_s, i_t, pV, pH in (
        (m.source.trees_plus, m.target.trees_plus, m.phi_V_plus, m.phi_H_plus),
        (m.source.trees_minus, m.target.trees_minus, m.phi_V_minus, m.phi_H_minus),
    ):
        p = compose_parenthesized(i_s, standard_parenthesization(pV))
        p2 = compose_parenthesized(standard_parenthesization(pH), i_t)
        if not _same_ordered(p.base, p2.base):
            raise ModuliError("the two composites differ as ordered morphisms")
        p2 = ParenthesizedOrderedMorphism(p.base, p2.trees)
        out = out * higher_associator(phi, p, p2, D, strands)
    return out


def apply_morphism(
    m: SurfaceMorphism,
    src: QuantAlgebra,
    tgt: QuantAlgebra,
    phi: Associator,
    workers: int = 1,
) -> HMap:
    """The algebra map ``Quant(source) -> Quant(target)`` induced by ``m``.

    An invariant of the source is acted on by the higher associator
    relating the two parenthesizations of ``H_Gamma -> V_Gamma'`` (the
    reduction to the coarser colours is the identity on invariants) and
    then pulled back along the diagonal map of factor spaces.
    """
    diag = m.diagnostics()
    if diag:
        raise ModuliError("; ".join(diag))
    for A in src.parts() + tgt.parts():
        if A.associator_id not in (phi.ident, "classical"):
            raise ModuliError("quantizations were built with a different associator")
    D, W = tgt.D, tgt.W
    if (src.D, src.W) != (D, W):
        raise ModuliError("source and target truncations differ")
    scomp, tcomp = _components(m.source), _components(m.target)
    sparts, tparts = src.parts(), tgt.parts()
    if len(sparts) != len(scomp) or len(tparts) != len(tcomp):
        raise ModuliError("quantizations do not match the component structure of the surfaces")
    # joint target ring over the kept coordinates of all target blocks
    names: List[str] = []
    tgt_embed: List[List[Optional[int]]] = []
    for (pre, _), A in zip(tcomp, tparts):
        B = A.ctx.basis
        emb = []
        for i in range(A.ctx.X.ring.n):
            r = B.restriction[i]
            if r is None:
                emb.append(None)
            else:
                emb.append(len(names) + r)
        names.extend(pre + nm for nm in B.kept_ring.names)
        tgt_embed.append(emb)
    out = JetRing(names, W)
    # coordinates of the target basis in the joint ring
    if isinstance(tgt, TensorQuant):
        tuples = tgt.tuples
        tindex = tgt.index
    else:
        tuples = [(i,) for i in range(tgt.dim)]
        tindex = {(i,): i for i in range(tgt.dim)}
    code_of_part = []
    for b, A in enumerate(tparts):
        tr = A.ctx.X.ring.rename_map(out, tgt_embed[b])
        code_of_part.append([tr(mo) for mo in A.ctx.basis.free])
    coord_index = {}
    for t in tuples:
        code = sum(code_of_part[b][i] for b, i in enumerate(t))
        coord_index[code] = tindex[t]

    def coords(p: Poly) -> Dict[int, Q]:
        return {coord_index[c]: v for c, v in p.items() if c in coord_index}

    # pullbacks from each source block into the joint ring
    pullbacks = []
    for s, ((pre, comp), A) in enumerate(zip(scomp, sparts)):
        Xs = A.ctx.X
        ims: List[Poly] = [None] * Xs.ring.n  # type: ignore
        renaming: List[Optional[int]] = [None] * Xs.ring.n
        pure = True
        for f in comp.graph.factors:
            fm = m.factor_map(pre + f)
            tb, tf = _split_label(tcomp, fm.target)
            At = tparts[tb]
            sp_s, sp_t = comp.spaces[f], tcomp[tb][1].spaces[tf]
            fims = _factor_pullback_images(m, pre + f, sp_s.ring, sp_t.ring)
            tcoords = At.ctx.X.coords[tf]
            emb = [tgt_embed[tb][j] for j in tcoords]
            for j, im in zip(Xs.coords[f], fims):
                ims[j] = sp_t.ring.rename(im, out, emb)
                if m.factor_maps.get(pre + f) is not None and m.factor_maps[pre + f].images is not None:
                    pure = False
                else:
                    renaming[j] = emb[Xs.coords[f].index(j)]
        if pure:
            trs = Xs.ring.rename_map(out, renaming)
            pullbacks.append(lambda f, order, R=Xs.ring, ren=renaming, trs=trs: R.rename(f, out, ren, order, trs))
        else:
            pullbacks.append(lambda f, order, R=Xs.ring, ims=ims: R.substitute(f, out, ims, order))
    # the higher associator on the source strands
    gs = m.source.graph
    strands = tuple(gs.half_edges)
    series = _higher_associator_for(m, phi, D, strands)
    bindings = {}
    for h in strands:
        s, lab = _split_label(scomp, h)
        Xs = sparts[s].ctx.X
        bindings[h] = StrandBinding(s, Xs.strand_fields[lab], Xs.strand_sign[lab])
    op = act_chord(series, bindings, m.source.t.t)
    op.nslots = len(sparts)
    sources = [(f"src{s}", A.ctx.basis.lift, A.ctx.X.ring) for s, A in enumerate(sparts)]
    ev = OperatorEvaluator(op, sources, pullbacks, out, W, D)
    if isinstance(src, TensorQuant):
        cells = list(src.tuples)
    else:
        cells = [(i,) for i in range(src.dim)]
    cols = _run_cells(ev, coords, cells, workers)
    return HMap(src, tgt, [tgt.clip(c) for c in cols])


# ----------------------------------------------------------- disjoint union


def _prefix_ordered(p: OrderedMorphism, pre: str) -> Dict[str, Tuple[str, ...]]:
    return {pre + j: tuple(pre + x for x in f) for j, f in zip(p.target, p.fibers)}


def _prefix_tree(t, pre: str):
    from .ordcat import Node

    if t is None:
        return None
    if isinstance(t, Node):
        return Node(_prefix_tree(t.left, pre), _prefix_tree(t.right, pre))
    return pre + t


def empty_surface(g: LieAlgebra, t: CasimirElement, name: str = "empty") -> SkeletizedColouredSurface:
    return SkeletizedColouredSurface(CiliatedGraph.build(), g, t, {}, {}, name=name)


def disjoint_union(parts: Sequence[SkeletizedColouredSurface], prefixes: Optional[Sequence[str]] = None, name: Optional[str] = None) -> SkeletizedColouredSurface:
    """Disjoint union with labels prefixed by ``prefixes`` (default ``"0."``, ``"1."``...)."""
    parts = list(parts)
    if not parts:
        raise ModuliError("disjoint union of no surfaces")
    prefixes = list(prefixes) if prefixes is not None else [f"{i}." for i in range(len(parts))]
    g, t = parts[0].g, parts[0].t
    cp: Dict[str, Tuple[str, ...]] = {}
    cm: Dict[str, Tuple[str, ...]] = {}
    edges: Dict[str, Tuple[str, str]] = {}
    colours, spaces, slices = {}, {}, {}
    tp, tm = [], []
    comps = []
    for pre, G in zip(prefixes, parts):
        if G.g != g:
            raise ModuliError("all parts must use the same Lie algebra")
        for sub_pre, sub in _components(G):
            comps.append((pre + sub_pre, sub))
        gr = G.graph
        cp.update(_prefix_ordered(gr.i_plus, pre))
        cm.update(_prefix_ordered(gr.i_minus, pre))
        for e in gr.E:
            edges[pre + e] = (pre + gr.h_plus[e], pre + gr.h_minus[e])
        colours.update({pre + v: c for v, c in G.colours.items()})
        spaces.update({pre + f: s for f, s in G.spaces.items()})
        slices.update({pre + v: (pre + f, b) for v, (f, b) in G.slices.items()})
        tp.extend(_prefix_tree(x, pre) for x in G.trees_plus.trees)
        tm.extend(_prefix_tree(x, pre) for x in G.trees_minus.trees)
    graph = CiliatedGraph.build(cp, cm, edges)
    U = SkeletizedColouredSurface(
        graph,
        g,
        t,
        colours,
        spaces,
        ParenthesizedOrderedMorphism(graph.i_plus, tuple(tp)),
        ParenthesizedOrderedMorphism(graph.i_minus, tuple(tm)),
        slices,
        name or " + ".join(G.name for G in parts),
        tuple(c for c in comps if c[1].graph.vertices or c[1].graph.half_edges) or tuple(comps[:1]),
    )
    return U


def tensor_maps(maps: Sequence[HMap], src: TensorQuant, tgt: TensorQuant) -> HMap:
    """``f_1 (x) ... (x) f_r`` between tensor products.

    ``src`` has one factor per map (the maps' sources) and ``tgt`` is
    the concatenation of the maps' targets.
    """
    D, W = tgt.D, tgt.W
    widths = [len(f.tgt.parts()) for f in maps]
    if len(src.parts()) != len(maps) or sum(widths) != len(tgt.parts()):
        raise ModuliError("tensor_maps: factor structure mismatch")

    def tup(f: HMap, l: int) -> Tuple[int, ...]:
        return f.tgt.tuples[l] if isinstance(f.tgt, TensorQuant) else (l,)

    cols = []
    for t in src.tuples:
        cur: Dict[Tuple[int, Tuple[int, ...]], Q] = {(0, ()): Q(1)}
        for f, i in zip(maps, t):
            col = f.cols[i]
            nxt: Dict[Tuple[int, Tuple[int, ...]], Q] = {}
            for (k, pre), c in cur.items():
                for k2 in range(D + 1 - k):
                    for l, v in col[k2].items():
                        key = (k + k2, pre + tup(f, l))
                        nxt[key] = nxt.get(key, 0) + c * v
            cur = {x: v for x, v in nxt.items() if v}
        out = _hzero(D)
        for (k, tt), c in cur.items():
            idx = tgt.index.get(tt)
            if idx is not None and tgt.degrees[idx] <= W - 2 * k:
                _iadd(out[k], {idx: c})
        cols.append(out)
    return HMap(src, tgt, cols)
