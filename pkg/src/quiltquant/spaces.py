"""Formal affine spaces with Lie algebra actions.

A :class:`GSpace` is a jet ring together with one :class:`Derivation`
per basis element of the acting Lie algebra. The module provides the
two geometric oracles (coisotropic stabilizers and quasi-Poisson
commutativity), expansion of chord series into differential operators,
solvers for invariant jets and the classical Poisson bracket.

Precision. A derivation whose coefficients have constant terms lowers
the jet order by one. For chord actions this is compensated by hbar: a
chord is two derivations and one power of hbar, so the weight
``x-degree + 2 * hbar-degree`` never decreases. Computations in the
moduli code keep everything modulo weight above a bound ``W`` and are
therefore exact in that quotient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .jets import JetRing, Poly
from .linalg import kernel
from .rational import Q

__all__ = [
    "SpaceError",
    "PrecisionTaggedValue",
    "Derivation",
    "GSpace",
    "apply_derivation",
    "product_space",
    "coisotropic_stabilizers_check",
    "quasi_poisson_comm_check",
    "casimir_pairs",
    "ChordOperator",
    "act_chord",
    "invariants",
    "SliceLift",
    "PoissonBracket",
    "poisson_bivector",
]


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class PrecisionTaggedValue:
    value: Poly
    trusted_order: int

    def agrees(self, other: "PrecisionTaggedValue", R: JetRing) -> bool:
        d = min(self.trusted_order, other.trusted_order)
        return R.truncate(self.value, d) == R.truncate(other.value, d)


@dataclass
class Derivation:
    """``sum_i coeffs[i] * d/dx_i`` on ``ring``; coefficients trusted to ``precision``."""

    ring: JetRing
    coeffs: Dict[int, Poly]
    precision: int

    def __post_init__(self):
        self.coeffs = {i: c for i, c in self.coeffs.items() if c}

    @property
    def has_constant(self) -> bool:
        return any(c.get(0) for c in self.coeffs.values())

    def __call__(self, f: Mapping, order: Optional[int] = None) -> Poly:
        R = self.ring
        order = R.order if order is None else order
        out: Poly = {}
        for i, c in self.coeffs.items():
            df = R.diff(f, i)
            if df:
                R.iadd(out, R.mul(c, df, order))
        return out

    def apply(self, f: Mapping, order: Optional[int] = None) -> PrecisionTaggedValue:
        return apply_derivation(self, f, order)

    def commutator(self, other: "Derivation") -> "Derivation":
        R = self.ring
        out: Dict[int, Poly] = {}
        for i in range(R.n):
            a = self(other.coeffs.get(i, {}))
            b = other(self.coeffs.get(i, {}))
            v = R.add(a, b, -1)
            if v:
                out[i] = v
        prec = min(self.precision, other.precision) - (1 if (self.has_constant or other.has_constant) else 0)
        return Derivation(R, out, prec)

    def combine(self, other: "Derivation", c=1) -> "Derivation":
        R = self.ring
        out = {i: dict(v) for i, v in self.coeffs.items()}
        for i, v in other.coeffs.items():
            out[i] = R.add(out.get(i, {}), v, c)
        return Derivation(R, out, min(self.precision, other.precision))

    def scaled(self, c) -> "Derivation":
        R = self.ring
        return Derivation(R, {i: R.scale(v, Q(c)) for i, v in self.coeffs.items()}, self.precision)

    def transport(self, target: JetRing, mapping: Sequence[Optional[int]]) -> "Derivation":
        """Same vector field written in ``target`` through an injective renaming."""
        tr = self.ring.rename_map(target, mapping)
        coeffs = {}
        for i, c in self.coeffs.items():
            j = mapping[i]
            if j is None:
                raise SpaceError("cannot transport a derivation along a coordinate it moves")
            coeffs[j] = self.ring.rename(c, target, mapping, tr=tr)
        return Derivation(target, coeffs, self.precision)

    def equals(self, other: "Derivation", order: Optional[int] = None) -> bool:
        R = self.ring
        order = min(self.precision, other.precision) if order is None else order
        for i in set(self.coeffs) | set(other.coeffs):
            if R.truncate(self.coeffs.get(i, {}), order) != R.truncate(other.coeffs.get(i, {}), order):
                return False
        return True


def apply_derivation(D: Derivation, f: Mapping, order: Optional[int] = None, f_order: Optional[int] = None) -> PrecisionTaggedValue:
    """Apply ``D`` and record how far the result can be trusted.

    ``f`` is trusted to ``f_order`` (default: the ring order). The result
    loses one order when a coefficient has a constant term.
    """
    R = D.ring
    f_order = R.order if f_order is None else f_order
    trusted = min(D.precision, f_order) - (1 if D.has_constant else 0)
    order = trusted if order is None else min(order, trusted)
    return PrecisionTaggedValue(R.truncate(D(f, order), order), trusted)


@dataclass
class GSpace:
    """A jet ring with an action of a Lie algebra of dimension ``dim``.

    ``fields[a]`` is the vector field of the ``a``-th basis element.
    ``blocks`` lists named groups of coordinates (the factors of a
    product); a single-factor space has one block.
    """

    ring: JetRing
    dim: int
    fields: List[Derivation]
    name: str = "X"
    blocks: Dict[str, Tuple[int, ...]] = field(default_factory=dict)
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.fields) != self.dim:
            raise SpaceError("one field per basis element is required")
        if not self.blocks:
            self.blocks = {self.name: tuple(range(self.ring.n))}

    @property
    def precision(self) -> int:
        return min((f.precision for f in self.fields), default=self.ring.order)

    def restricted(self, indices: Sequence[int], name: Optional[str] = None) -> "GSpace":
        """Same space acted on by the sub-family of fields ``indices``."""
        return GSpace(self.ring, len(indices), [self.fields[i] for i in indices], name or self.name, dict(self.blocks), dict(self.meta))


def product_space(parts: Sequence[Tuple[str, GSpace]], order: Optional[int] = None) -> Tuple[JetRing, Dict[str, List[int]]]:
    """Ring of a product of spaces: coordinates are prefixed by the part names."""
    names: List[str] = []
    offsets: Dict[str, List[int]] = {}
    for label, sp in parts:
        idx = []
        for nm in sp.ring.names:
            idx.append(len(names))
            names.append(f"{label}.{nm}")
        offsets[label] = idx
    if order is None:
        order = min((sp.ring.order for _, sp in parts), default=0)
    return JetRing(names, order), offsets


# ----------------------------------------------------------------- oracles


def casimir_pairs(t: Mapping[Tuple[int, int], Q]) -> List[Tuple[int, int, Q]]:
    return sorted((a, b, Q(c)) for (a, b), c in t.items() if c)


def coisotropic_stabilizers_check(X: GSpace, t: Mapping[Tuple[int, int], Q], order: Optional[int] = None):
    """``None`` when ``sum t^{ab} V_a (x) V_b`` vanishes, else a witness.

    The symmetric tensor field is evaluated componentwise on coordinate
    differentials: entry ``(i, j)`` is ``sum t^{ab} V_a^i V_b^j``.
    """
    R = X.ring
    order = X.precision if order is None else order
    pairs = casimir_pairs(t)
    for i in range(R.n):
        for j in range(i, R.n):
            acc: Poly = {}
            for a, b, c in pairs:
                u = X.fields[a].coeffs.get(i)
                v = X.fields[b].coeffs.get(j)
                if u and v:
                    R.iadd(acc, R.mul(u, v, order), c)
            if acc:
                return {"component": (R.names[i], R.names[j]), "value": R.fmt(acc)}
    return None


def quasi_poisson_comm_check(A: GSpace, t: Mapping[Tuple[int, int], Q], degree: int = 2):
    """``None`` when ``sum t^{ab} V_a(f) V_b(g) = 0`` for monomials of degree <= ``degree``."""
    R = A.ring
    pairs = casimir_pairs(t)
    monos = [c for c in R.monomials if 0 < R.deg[c] <= degree]
    cache: Dict[Tuple[int, int], PrecisionTaggedValue] = {}

    def V(a, m):
        k = (a, m)
        if k not in cache:
            cache[k] = apply_derivation(A.fields[a], {m: Q(1)})
        return cache[k]

    for f in monos:
        for g in monos:
            acc: Poly = {}
            trusted = R.order
            for a, b, c in pairs:
                x, y = V(a, f), V(b, g)
                trusted = min(trusted, x.trusted_order, y.trusted_order)
                R.iadd(acc, R.mul(x.value, y.value), c)
            acc = R.truncate(acc, trusted)
            if acc:
                return {"f": R.fmt({f: 1}), "g": R.fmt({g: 1}), "value": R.fmt(acc), "trusted_order": trusted}
    return None


# ------------------------------------------------------ chord operators


@dataclass(frozen=True)
class StrandBinding:
    """Where a strand acts: tensor slot, the fields of its factor, sign of ``t``."""

    slot: int
    fields: Tuple[Derivation, ...]
    sign: int = 1


@dataclass
class ChordOperator:
    """A chord series expanded into sums of products of derivations.

    ``terms[(k, seqs)] = coef`` where ``seqs[s]`` is, for slot ``s``, a
    tuple of ``(strand, field indices)`` pairs; field indices are listed
    outermost first. Derivations of different strands commute, so this
    form is canonical.
    """

    nslots: int
    bindings: Dict[Hashable, StrandBinding]
    strand_order: Dict[Hashable, int]
    terms: Dict[Tuple[int, tuple], Q]

    def degrees(self) -> List[int]:
        return sorted({k for k, _ in self.terms})

    def by_degree(self, k: int) -> List[Tuple[tuple, Q]]:
        return [(s, c) for (kk, s), c in self.terms.items() if kk == k]


def act_chord(series, bindings: Mapping[Hashable, StrandBinding], t: Mapping[Tuple[int, int], Q]) -> ChordOperator:
    """Expand ``series`` into a :class:`ChordOperator`.

    Each chord ``t^{uv}`` becomes ``sign * sum_{a,b} t^{ab} V_a^{(u)} V_b^{(v)}``
    where ``sign`` is ``-1`` when both strands carry the opposite form
    (negative strands) and ``+1`` when both are positive.
    """
    pairs = casimir_pairs(t)
    strands = series.strands
    for s in strands:
        if s not in bindings:
            raise SpaceError(f"strand {s!r} is not bound")
    nslots = 1 + max((b.slot for b in bindings.values()), default=-1)
    order = {s: i for i, s in enumerate(strands)}
    out: Dict[Tuple[int, tuple], Q] = {}
    for word, coef in series.terms.items():
        partial: Dict[tuple, Q] = {(): coef}
        for (i, j) in word:
            u, v = strands[i], strands[j]
            bu, bv = bindings[u], bindings[v]
            if bu.sign != bv.sign:
                raise SpaceError("a chord joins strands of opposite sign")
            sg = bu.sign
            nxt: Dict[tuple, Q] = {}
            for seq, c in partial.items():
                for a, b, tc in pairs:
                    key = seq + ((u, a), (v, b))
                    val = c * tc * sg
                    nxt[key] = nxt.get(key, 0) + val
            partial = {k: c for k, c in nxt.items() if c}
        k = len(word)
        for seq, c in partial.items():
            per: Dict[Hashable, List[int]] = {}
            for s, a in seq:
                per.setdefault(s, []).append(a)
            slots: List[List[Tuple[Hashable, Tuple[int, ...]]]] = [[] for _ in range(nslots)]
            for s in sorted(per, key=order.__getitem__):
                slots[bindings[s].slot].append((s, tuple(per[s])))
            key = (k, tuple(tuple(x) for x in slots))
            val = out.get(key, 0) + c
            if val:
                out[key] = val
            else:
                out.pop(key, None)
    return ChordOperator(nslots, dict(bindings), order, out)


def apply_sequence(op: ChordOperator, slot_seq: Sequence[Tuple[Hashable, Tuple[int, ...]]], f: Mapping, order: int) -> Poly:
    """Apply one slot's derivation sequence (innermost derivation first)."""
    out = f
    for s, idxs in slot_seq:
        fields = op.bindings[s].fields
        for a in reversed(idxs):
            out = fields[a](out, order)
            if not out:
                return {}
    return out


# ------------------------------------------------------------- invariants


def invariants(R: JetRing, fields: Sequence[Derivation], degree: int) -> List[Poly]:
    """Jets of degree <= ``degree`` killed by ``fields`` modulo degree >= ``degree``.

    Kernel of the stacked action matrices. Unknown order is by
    decreasing degree so that each basis jet's free monomial is its
    lowest-degree term.
    """
    monos = [m for m in R.monomials if R.deg[m] <= degree]
    cols: Dict[int, Dict] = {}
    for m in monos:
        img = {}
        for a, Dv in enumerate(fields):
            v = Dv({m: Q(1)}, degree - 1)
            for k, c in v.items():
                img[(a, k)] = c
        cols[m] = img
    order = sorted(monos, key=lambda m: (-R.deg[m], m))
    basis = kernel(cols, order)
    basis.sort(key=lambda v: (R.deg[_free(v, R)], _free(v, R)))
    return basis


def _free(v: Mapping[int, Q], R: JetRing) -> int:
    return min(v, key=lambda m: (R.deg[m], m))


class SliceLift:
    """Invariants of ``sum_v c_v`` reconstructed from their values on a slice.

    ``colours`` is a list of ``(fields, slice_coordinates)``: the fields
    of one colour and coordinates on which that colour acts simply
    transitively near the origin. Every invariant is determined by its
    restriction to ``{slice coordinates = 0}``, and every jet on the
    slice extends uniquely. The extension integrates
    ``d_y F = -A(y)^{-1} V_rest F`` degree by degree in the transverse
    coordinates, where ``A`` is the matrix of slice components.
    """

    def __init__(self, R: JetRing, colours: Sequence[Tuple[Sequence[Derivation], Sequence[int]]], order: Optional[int] = None):
        self.R = R
        self.order = R.order if order is None else order
        self.slice = sorted(i for _, ys in colours for i in ys)
        if len(set(self.slice)) != len(self.slice):
            raise SpaceError("slices of different colours overlap")
        sl = set(self.slice)
        self.free_coords = [i for i in range(R.n) if i not in sl]
        B = R.B
        self.ydeg = {c: sum((c // R.pow[i]) % B for i in self.slice) for c in R.monomials}
        self.colours = []
        for fields, ys in colours:
            ys = list(ys)
            if len(fields) != len(ys):
                raise SpaceError("a slice must have one coordinate per colour generator")
            for Dv in fields:
                for i in Dv.coeffs:
                    if i in sl and i not in ys:
                        raise SpaceError("a colour moves another colour's slice coordinates")
            A = [[Dv.coeffs.get(i, {}) for i in ys] for Dv in fields]
            Binv = _invert_jet_matrix(R, A, self.order)
            yd = self.ydeg
            Bparts = [[[{k: v for k, v in b.items() if yd[k] == e} for e in range(self.order + 1)] for b in row] for row in Binv]
            rest = [Derivation(R, {i: c for i, c in Dv.coeffs.items() if i not in sl}, Dv.precision) for Dv in fields]
            self.colours.append((ys, Bparts, rest))

    def slice_monomials(self, degree: Optional[int] = None) -> List[int]:
        degree = self.order if degree is None else degree
        return [c for c in self.R.monomials if self.ydeg[c] == 0 and self.R.deg[c] <= degree]

    def restrict(self, f: Mapping) -> Poly:
        yd = self.ydeg
        return {k: v for k, v in f.items() if yd[k] == 0}

    def lift(self, g: Mapping, order: Optional[int] = None) -> Poly:
        """The invariant jet whose restriction to the slice is ``g``."""
        R = self.R
        order = self.order if order is None else order
        yd = self.ydeg
        parts: List[Poly] = [{k: v for k, v in g.items() if yd[k] == 0 and R.deg[k] <= order}]
        for k in g:
            if yd[k]:
                raise SpaceError("slice data must not involve slice coordinates")
        applied: List[List[List[Poly]]] = [[[] for _ in rest] for _, _, rest in self.colours]
        total = dict(parts[0])
        for T in range(1, order + 1):
            j = T - 1
            for ci, (_, _, rest) in enumerate(self.colours):
                for a, Dv in enumerate(rest):
                    applied[ci][a].append(Dv(parts[j], order))
            acc: Poly = {}
            for ci, (ys, Bparts, rest) in enumerate(self.colours):
                for r, yi in enumerate(ys):
                    yv = R.var(yi)
                    inner: Poly = {}
                    for a in range(len(rest)):
                        bp = Bparts[r][a]
                        for jj in range(T):
                            w = applied[ci][a][jj]
                            if not w:
                                continue
                            # coefficients may depend on y, so every part of
                            # y-degree at most T-1-jj can contribute
                            for e in range(min(T - jj, len(bp))):
                                if bp[e]:
                                    R.iadd(inner, R.mul(bp[e], w, order - 1))
                    if inner:
                        R.iadd(acc, R.mul(yv, inner, order), -1)
            FT = {k: v / T for k, v in acc.items() if yd[k] == T}
            parts.append(FT)
            R.iadd(total, FT)
        return total


def _invert_jet_matrix(R: JetRing, A: List[List[Poly]], order: int) -> List[List[Poly]]:
    """Inverse of a square jet matrix invertible at the origin (Neumann series)."""
    n = len(A)
    A0 = [[Q(A[i][j].get(0, 0)) for j in range(n)] for i in range(n)]
    inv0 = _invert_rational(A0)
    # A = A0 (I + N) with N = inv0 (A - A0); A^{-1} = (I - N + N^2 - ...) inv0
    N = [[{} for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc: Poly = {}
            for k in range(n):
                if inv0[i][k]:
                    rest = {m: v for m, v in A[k][j].items() if m}
                    R.iadd(acc, rest, inv0[i][k])
            N[i][j] = acc
    S = [[R.const(1) if i == j else {} for j in range(n)] for i in range(n)]
    P = [row[:] for row in S]
    for _ in range(order):
        P = _matmul(R, P, N, order)
        P = [[R.scale(x, -1) for x in row] for row in P]
        if all(not x for row in P for x in row):
            break
        S = [[R.add(S[i][j], P[i][j]) for j in range(n)] for i in range(n)]
    inv0j = [[R.const(inv0[i][j]) for j in range(n)] for i in range(n)]
    return _matmul(R, S, inv0j, order)


def _matmul(R: JetRing, X, Y, order: int):
    n, m, p = len(X), len(Y), len(Y[0]) if Y else 0
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc: Poly = {}
            for k in range(m):
                if X[i][k] and Y[k][j]:
                    R.iadd(acc, R.mul(X[i][k], Y[k][j], order))
            row.append(acc)
        out.append(row)
    return out


def _invert_rational(M: List[List[Q]]) -> List[List[Q]]:
    n = len(M)
    aug = [list(map(Q, row)) + [Q(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            raise SpaceError("slice matrix is singular at the origin")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


# ------------------------------------------------------------ Poisson


class PoissonBracket:
    """``{f, g} = 1/2 sum_i (V_{xi^i} f V_{xi_i} g - V_{xi_i} f V_{xi^i} g)``.

    ``pairs`` lists ``(i, j)`` with ``xi_i = e_i`` (in h) and ``xi^i`` the
    dual element (in h*), as indices into the space's fields.
    """

    def __init__(self, M: GSpace, pairs: Sequence[Tuple[int, int]]):
        self.M = M
        self.pairs = list(pairs)

    def __call__(self, f: Mapping, g: Mapping, order: Optional[int] = None) -> Poly:
        R = self.M.ring
        order = R.order if order is None else order
        F = self.M.fields
        acc: Poly = {}
        for i, di in self.pairs:
            a = R.mul(F[di](f, order), F[i](g, order), order)
            b = R.mul(F[i](f, order), F[di](g, order), order)
            R.iadd(acc, a, Q(1, 2))
            R.iadd(acc, b, Q(-1, 2))
        return acc

    def bivector(self) -> Dict[Tuple[int, int], Poly]:
        """Components ``{x_i, x_j}`` for ``i < j``."""
        R = self.M.ring
        out = {}
        for i in range(R.n):
            for j in range(i + 1, R.n):
                v = self(R.var(i), R.var(j))
                if v:
                    out[(i, j)] = v
        return out


def poisson_bivector(M: GSpace, n: int) -> PoissonBracket:
    """Bracket for a space acted on by a double ``h + h*`` of ``dim h = n``.

    Fields ``0..n-1`` are the ``e_i`` and ``n..2n-1`` the dual ``e^i``.
    """
    if M.dim != 2 * n:
        raise SpaceError("the space must carry an action of the double")
    return PoissonBracket(M, [(i, n + i) for i in range(n)])
