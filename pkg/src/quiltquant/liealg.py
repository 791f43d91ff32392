"""Exact Lie algebra kernel.

Lie algebras and bialgebras are given by rational structure constants.
The Drinfeld double of a bialgebra ``h`` lives on ``h + h*`` with basis
``e_0..e_{n-1}, e^0..e^{n-1}`` (indices ``0..2n-1``) and the evaluation
pairing. Vectors with jet coefficients ("g-valued jets") are lists of
jets indexed by basis elements; the formal group of ``h`` is the jet
space of its exponential coordinates with the BCH product.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import freealg
from .jets import JetRing, Poly
from .linalg import Echelon, kernel
from .rational import Q, as_q

__all__ = [
    "LieError",
    "CocycleError",
    "LieAlgebra",
    "LieBialgebra",
    "ManinTriple",
    "CasimirElement",
    "Subalgebra",
    "check_jacobi",
    "double",
    "casimir",
    "is_coisotropic",
    "bch",
    "bch_terms",
    "factorize",
    "GAction",
    "g_action_on_H",
    "CONVENTIONS",
    "example_bialgebra",
    "abelian_bialgebra",
    "BCH_MAX_DEGREE",
]

BCH_MAX_DEGREE = 6


class LieError(ValueError):
    pass


class CocycleError(LieError):
    def __init__(self, message: str, witness):
        super().__init__(message)
        self.witness = witness


Vec = Dict[int, Q]


class LieAlgebra:
    """Structure constants ``[e_i, e_j] = sum_k c^k_{ij} e_k``."""

    def __init__(self, labels: Sequence[str], constants: Mapping[Tuple[int, int], Mapping[int, object]]):
        self.labels = tuple(labels)
        self.dim = len(self.labels)
        n = self.dim
        table: Dict[Tuple[int, int], Vec] = {}
        for (i, j), vec in constants.items():
            if not (0 <= i < n and 0 <= j < n):
                raise LieError(f"bracket index out of range: {(i, j)}")
            v = {k: as_q(c) for k, c in vec.items() if as_q(c)}
            for k in v:
                if not 0 <= k < n:
                    raise LieError(f"bracket result index out of range: {k}")
            if i == j:
                if v:
                    raise LieError(f"[e_{i}, e_{i}] must vanish")
                continue
            neg = {k: -c for k, c in v.items()}
            if (j, i) in table and table[(j, i)] != neg:
                raise LieError(f"structure constants not antisymmetric at {(i, j)}")
            table[(i, j)] = v
            table[(j, i)] = neg
        self.table = {k: v for k, v in table.items() if v}

    def __repr__(self):
        return f"LieAlgebra({', '.join(self.labels)})"

    def __eq__(self, other):
        return isinstance(other, LieAlgebra) and self.labels == other.labels and self.table == other.table

    def c(self, i: int, j: int, k: int) -> Q:
        return self.table.get((i, j), {}).get(k, Q(0))

    def bracket_basis(self, i: int, j: int) -> Vec:
        return self.table.get((i, j), {})

    def bracket(self, u: Mapping[int, object], v: Mapping[int, object]) -> Vec:
        out: Vec = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self.table.get((i, j), {}).items():
                    out[k] = out.get(k, 0) + a * b * c
        return {k: Q(c) for k, c in out.items() if c}

    def is_abelian(self) -> bool:
        return not self.table

    def jet_bracket(self, R: JetRing, u: Sequence[Mapping], v: Sequence[Mapping], order: Optional[int] = None) -> List[Poly]:
        """Bracket of two g-valued jets (lists of jets indexed by basis)."""
        out: List[Poly] = [{} for _ in range(self.dim)]
        for (i, j), vec in self.table.items():
            if u[i] and v[j]:
                p = R.mul(u[i], v[j], order)
                if p:
                    for k, c in vec.items():
                        R.iadd(out[k], p, c)
        return out

    def to_json_obj(self) -> dict:
        return {
            "basis": list(self.labels),
            "bracket": [[i, j, k, str(c)] for (i, j), v in sorted(self.table.items()) if i < j for k, c in sorted(v.items())],
        }


def check_jacobi(L: LieAlgebra):
    """``None`` if Jacobi holds, else the first violating triple and its value."""
    n = L.dim
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                ei, ej, ek = {i: Q(1)}, {j: Q(1)}, {k: Q(1)}
                s: Vec = {}
                for x, y, z in ((ei, ej, ek), (ej, ek, ei), (ek, ei, ej)):
                    for m, c in L.bracket(x, L.bracket(y, z)).items():
                        s[m] = s.get(m, 0) + c
                s = {m: c for m, c in s.items() if c}
                if s:
                    return {"triple": (L.labels[i], L.labels[j], L.labels[k]), "value": {L.labels[m]: str(c) for m, c in s.items()}}
    return None


@dataclass
class LieBialgebra:
    """A Lie algebra with cobracket ``delta(e_i) = sum_{j<k} d^{jk}_i e_j ^ e_k``.

    ``cobracket[i]`` maps ordered pairs ``(j, k)`` to ``d^{jk}_i``; pairs
    with ``j > k`` are filled in by antisymmetry.
    """

    h: LieAlgebra
    cobracket: Dict[int, Dict[Tuple[int, int], Q]] = field(default_factory=dict)
    name: str = "bialgebra"

    def __post_init__(self):
        n = self.h.dim
        full: Dict[int, Dict[Tuple[int, int], Q]] = {}
        for i, tab in self.cobracket.items():
            out: Dict[Tuple[int, int], Q] = {}
            for (j, k), c in tab.items():
                c = as_q(c)
                if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
                    raise LieError(f"cobracket index out of range: {(i, j, k)}")
                if j == k:
                    if c:
                        raise LieError("cobracket must be antisymmetric")
                    continue
                if (k, j) in out and out[(k, j)] != -c:
                    raise LieError(f"cobracket not antisymmetric at {(i, j, k)}")
                out[(j, k)] = c
                out[(k, j)] = -c
            out = {p: c for p, c in out.items() if c}
            if out:
                full[i] = out
        self.cobracket = full

    @property
    def dim(self) -> int:
        return self.h.dim

    def d(self, i: int, j: int, k: int) -> Q:
        return self.cobracket.get(i, {}).get((j, k), Q(0))

    def dual_algebra(self) -> LieAlgebra:
        """``h*`` with ``[e^j, e^k] = sum_i d^{jk}_i e^i``."""
        n = self.dim
        cons: Dict[Tuple[int, int], Dict[int, Q]] = {}
        for i, tab in self.cobracket.items():
            for (j, k), c in tab.items():
                cons.setdefault((j, k), {})[i] = c
        return LieAlgebra([f"{x}*" for x in self.h.labels], cons)

    def validate(self):
        """Raise on Jacobi, co-Jacobi or cocycle failure."""
        w = check_jacobi(self.h)
        if w:
            raise CocycleError("bracket violates the Jacobi identity", w)
        w = check_jacobi(self.dual_algebra())
        if w:
            raise CocycleError("cobracket violates the co-Jacobi identity", w)
        double(self)

    def to_json_obj(self) -> dict:
        obj = self.h.to_json_obj()
        obj["cobracket"] = [[i, j, k, str(c)] for i, tab in sorted(self.cobracket.items()) for (j, k), c in sorted(tab.items()) if j < k]
        obj["name"] = self.name
        return obj


@dataclass
class CasimirElement:
    g: LieAlgebra
    t: Dict[Tuple[int, int], Q]

    def pairs(self) -> List[Tuple[int, int, Q]]:
        return sorted((a, b, c) for (a, b), c in self.t.items() if c)

    def is_symmetric(self) -> bool:
        return all(self.t.get((b, a), 0) == c for (a, b), c in self.t.items())

    def ad_invariance_witness(self):
        g, n = self.g, self.g.dim
        for i in range(n):
            for a in range(n):
                for b in range(n):
                    s = Q(0)
                    for c in range(n):
                        s += g.c(i, c, a) * self.t.get((c, b), 0) + g.c(i, c, b) * self.t.get((a, c), 0)
                    if s:
                        return {"generator": g.labels[i], "entry": (g.labels[a], g.labels[b]), "value": str(s)}
        return None


@dataclass
class ManinTriple:
    bialgebra: LieBialgebra
    g: LieAlgebra
    n: int
    pairing: Dict[Tuple[int, int], Q]

    @property
    def h_indices(self) -> List[int]:
        return list(range(self.n))

    @property
    def hstar_indices(self) -> List[int]:
        return list(range(self.n, 2 * self.n))

    def pair(self, u: Mapping[int, object], v: Mapping[int, object]) -> Q:
        s = Q(0)
        for (a, b), c in self.pairing.items():
            if a in u and b in v:
                s += c * u[a] * v[b]
        return s

    def pairing_invariance_witness(self):
        g, N = self.g, self.g.dim
        for z in range(N):
            for x in range(N):
                for y in range(N):
                    s = self.pair(g.bracket({z: 1}, {x: 1}), {y: 1}) + self.pair({x: 1}, g.bracket({z: 1}, {y: 1}))
                    if s:
                        return (g.labels[z], g.labels[x], g.labels[y])
        return None


def double(b: LieBialgebra) -> ManinTriple:
    """Drinfeld double on ``h + h*``; raises :class:`CocycleError` when Jacobi fails."""
    h, n = b.h, b.dim
    cons: Dict[Tuple[int, int], Dict[int, Q]] = {}

    def put(i, j, k, c):
        if c:
            d = cons.setdefault((i, j), {})
            d[k] = d.get(k, 0) + c

    for (i, j), vec in h.table.items():
        if i < j:
            for k, c in vec.items():
                put(i, j, k, c)
    for i, tab in b.cobracket.items():
        for (j, k), c in tab.items():
            if j < k:
                put(n + j, n + k, n + i, c)
    for i in range(n):
        for j in range(n):
            # [e_i, e^j] = sum_k d^{jk}_i e_k - sum_k c^j_{ik} e^k
            for k in range(n):
                put(i, n + j, k, b.d(i, j, k))
                put(i, n + j, n + k, -h.c(i, k, j))
    labels = list(h.labels) + [f"{x}*" for x in h.labels]
    g = LieAlgebra(labels, cons)
    w = check_jacobi(g)
    if w:
        raise CocycleError("the double violates Jacobi: the cobracket is not a 1-cocycle", w)
    pairing = {}
    for i in range(n):
        pairing[(i, n + i)] = Q(1)
        pairing[(n + i, i)] = Q(1)
    return ManinTriple(b, g, n, pairing)


def casimir(mt: ManinTriple) -> CasimirElement:
    """``t = sum_i (e_i (x) e^i + e^i (x) e_i)``, the inverse of the pairing."""
    n = mt.n
    t = {}
    for i in range(n):
        t[(i, n + i)] = Q(1)
        t[(n + i, i)] = Q(1)
    C = CasimirElement(mt.g, t)
    w = C.ad_invariance_witness()
    if w:
        raise LieError(f"Casimir is not ad-invariant: {w}")
    return C


@dataclass
class Subalgebra:
    g: LieAlgebra
    span: List[Dict[int, Q]]
    name: str = "c"

    def __post_init__(self):
        self.span = [{k: as_q(v) for k, v in vec.items() if as_q(v)} for vec in self.span]

    def echelon(self) -> Echelon:
        E = Echelon(lambda k: k)
        for v in self.span:
            E.add(dict(v))
        return E

    def dim(self) -> int:
        return len(self.echelon().pivots())

    def closure_witness(self):
        E = self.echelon()
        for a in self.span:
            for b in self.span:
                r = E.reduce(self.g.bracket(a, b))
                if r:
                    return (a, b)
        return None

    def basis(self) -> List[Dict[int, Q]]:
        E = self.echelon()
        return [E.rows[p] for p in sorted(E.pivots())]


def is_coisotropic(c: Subalgebra, t: CasimirElement) -> bool:
    """Whether ``t`` restricted to the annihilator of ``c`` vanishes."""
    if c.closure_witness() is not None:
        raise LieError(f"{c.name} is not closed under the bracket")
    N = c.g.dim
    # annihilator: functionals alpha with sum_k alpha_k v_k = 0 for v in span
    cols = {k: {i: v[k] for i, v in enumerate(c.span) if k in v} for k in range(N)}
    ann = kernel(cols, list(range(N)))
    for a in ann:
        for b in ann:
            s = Q(0)
            for (x, y), v in t.t.items():
                s += v * a.get(x, 0) * b.get(y, 0)
            if s:
                return False
    return True


# ------------------------------------------------------------------ BCH


@lru_cache(maxsize=None)
def bch_terms(N: int, max_degree: int = BCH_MAX_DEGREE) -> Tuple[Tuple[Tuple[int, ...], Q], ...]:
    """Left-normed bracket words ``w`` (letters 0 = x, 1 = y) and coefficients."""
    if N > max_degree:
        raise LieError(f"BCH degree {N} exceeds the configured maximum {max_degree}")
    ex = freealg.exp({(0,): Q(1)}, N)
    ey = freealg.exp({(1,): Q(1)}, N)
    z = freealg.log(freealg.mul(ex, ey, N), N)
    terms = freealg.dynkin_terms(z)
    return tuple(sorted((w, c) for w, c in terms.items() if c))


def bch(
    L: LieAlgebra,
    R: JetRing,
    x: Sequence[Mapping],
    y: Sequence[Mapping],
    N: Optional[int] = None,
    order: Optional[int] = None,
    max_degree: int = BCH_MAX_DEGREE,
) -> List[Poly]:
    """``log(exp x exp y)`` for g-valued jets, brackets of length <= ``N``.

    With ``x`` and ``y`` vanishing at the origin and ``N`` at least the
    jet order, the result is exact in the jet ring. ``N`` defaults to the
    jet order and may not exceed ``max_degree``.
    """
    order = R.order if order is None else order
    N = order if N is None else N
    N = max(N, 1)
    letters = (list(x), list(y))
    cache: Dict[Tuple[int, ...], List[Poly]] = {}

    def val(w):
        hit = cache.get(w)
        if hit is not None:
            return hit
        if len(w) == 1:
            r = [dict(p) for p in letters[w[0]]]
        else:
            r = L.jet_bracket(R, val(w[:-1]), letters[w[-1]], order)
        cache[w] = r
        return r

    out: List[Poly] = [{} for _ in range(L.dim)]
    for w, c in bch_terms(N, max(max_degree, BCH_MAX_DEGREE)):
        v = val(w)
        for k in range(L.dim):
            if v[k]:
                R.iadd(out[k], v[k], c)
    return [R.truncate(p, order) for p in out]


def factorize(mt: ManinTriple, R: JetRing, z: Sequence[Mapping], order: Optional[int] = None) -> Tuple[List[Poly], List[Poly]]:
    """``(lam, x)`` with ``lam`` in ``h*``, ``x`` in ``h`` and ``bch(lam, x) = z``."""
    order = R.order if order is None else order
    for p in z:
        if p.get(0):
            raise LieError("factorize needs a jet vanishing at the origin")
    g, n = mt.g, mt.n
    lam: List[Poly] = [{} for _ in range(2 * n)]
    x: List[Poly] = [{} for _ in range(2 * n)]
    for _ in range(order + 1):
        cur = bch(g, R, lam, x, order, order, max_degree=max(order, BCH_MAX_DEGREE))
        r = [R.add(R.truncate(z[k], order), cur[k], -1) for k in range(2 * n)]
        if not any(r):
            return lam, x
        for k in range(n):
            R.iadd(x[k], r[k])
            R.iadd(lam[n + k], r[n + k])
    raise LieError("factorization did not converge")


# ---------------------------------------------------------- g action on H


def _psi_coefficients(N: int) -> List[Q]:
    """Taylor coefficients of ``z / (1 - exp(-z))``."""
    a = [Q(0)] * (N + 1)
    fact = Q(1)
    for k in range(N + 1):
        fact *= k + 1
        a[k] = Q((-1) ** k) / fact
    b = [Q(0)] * (N + 1)
    b[0] = Q(1)
    for m in range(1, N + 1):
        b[m] = -sum(a[j] * b[m - j] for j in range(1, m + 1))
    return b


def _psi_apply(g: LieAlgebra, R: JetRing, X: Sequence[Poly], v: Sequence[Poly], sign: int, order: int, skip_identity=False) -> List[Poly]:
    """``psi(sign * ad_X) v`` (without the identity term when ``skip_identity``)."""
    coeffs = _psi_coefficients(order + 1)
    out: List[Poly] = [{} if skip_identity else dict(p) for p in v]
    cur = [dict(p) for p in v]
    for k in range(1, order + 1):
        cur = g.jet_bracket(R, X, cur, order)
        if not any(cur):
            break
        c = coeffs[k] * (sign**k)
        if c:
            for i in range(g.dim):
                if cur[i]:
                    R.iadd(out[i], cur[i], c)
    return out


CONVENTIONS = (("right", "lambda_y"), ("right", "y_lambda"), ("left", "lambda_y"), ("left", "y_lambda"))


@dataclass
class GAction:
    """Vector fields of ``g = h + h*`` on the formal group ``H``."""

    mt: ManinTriple
    ring: JetRing
    fields: list
    convention: Tuple[str, str]
    report: Dict = field(default_factory=dict)

    def space(self, name: str = "H"):
        from .spaces import GSpace

        return GSpace(self.ring, self.mt.g.dim, list(self.fields), name, meta={"convention": "/".join(self.convention)})


def _candidate_fields(mt: ManinTriple, R: JetRing, convention: Tuple[str, str]):
    from .spaces import Derivation

    g, n, order = mt.g, mt.n, R.order
    mult, fact = convention
    s_m = 1 if mult == "right" else -1
    s_f = -1 if fact == "lambda_y" else 1
    X: List[Poly] = [R.var(i) for i in range(n)] + [{} for _ in range(n)]
    fields = []
    for a in range(2 * n):
        xi = [R.const(1) if k == a else {} for k in range(2 * n)]
        u = _psi_apply(g, R, X, xi, s_m, order)
        # solve P_h w + psi(s_f ad_X) P_h* w = u with w = sum (-K)^j u
        w = [dict(p) for p in u]
        term = [dict(p) for p in u]
        for _ in range(order + 1):
            star = [{} for _ in range(n)] + term[n:]
            K = _psi_apply(g, R, X, star, s_f, order, skip_identity=True)
            term = [R.scale(p, -1) for p in K]
            if not any(term):
                break
            for i in range(2 * n):
                R.iadd(w[i], term[i])
        fields.append(Derivation(R, {i: w[i] for i in range(n) if w[i]}, order))
    return fields


def _homomorphism_witness(g: LieAlgebra, fields, order: int):
    from .spaces import Derivation

    R = fields[0].ring if fields else None
    for a in range(g.dim):
        for b in range(a + 1, g.dim):
            lhs = fields[a].commutator(fields[b])
            rhs = Derivation(R, {}, order)
            for k, c in g.bracket({a: 1}, {b: 1}).items():
                rhs = rhs.combine(fields[k], c)
            if not lhs.equals(rhs, order - 1):
                return (g.labels[a], g.labels[b])
    return None


def g_action_on_H(mt: ManinTriple, N: int, check_order: Optional[int] = None) -> GAction:
    """The g-action on ``H``, choosing the side convention by oracle.

    Each candidate convention is tested for: the homomorphism property,
    coisotropic stabilizers, quasi-Poisson commutativity and the
    dimension of diagonal ``h``-invariants of ``O(H x H)``. The first
    candidate passing all four is returned with the full report.
    """
    from .spaces import GSpace, coisotropic_stabilizers_check, invariants, quasi_poisson_comm_check

    n = mt.n
    t = casimir(mt).t
    R = JetRing([f"x{i}" for i in range(n)], N)
    report = {}
    chosen = None
    for conv in CONVENTIONS:
        fields = _candidate_fields(mt, R, conv)
        entry = {}
        entry["homomorphism"] = _homomorphism_witness(mt.g, fields, N) is None
        sp = GSpace(R, 2 * n, fields, "H")
        entry["coisotropic"] = coisotropic_stabilizers_check(sp, t, N - 1) is None
        entry["quasi_poisson"] = quasi_poisson_comm_check(sp, t, 1) is None
        entry["invariant_dimension"] = _diag_invariant_dimension_ok(mt, conv, min(N, 3))
        report["/".join(conv)] = entry
        if chosen is None and all(entry.values()):
            chosen = (conv, fields)
    if chosen is None:
        raise LieError(f"no side convention passes the oracles: {report}")
    return GAction(mt, R, chosen[1], chosen[0], report)


def _diag_invariant_dimension_ok(mt: ManinTriple, conv, d: int) -> bool:
    from .spaces import Derivation, invariants

    n = mt.n
    R1 = JetRing([f"x{i}" for i in range(n)], d + 1)
    f1 = _candidate_fields(mt, R1, conv)
    R2 = JetRing([f"a{i}" for i in range(n)] + [f"b{i}" for i in range(n)], d + 1)
    diag = []
    for a in range(n):
        A = f1[a].transport(R2, list(range(n)))
        B = f1[a].transport(R2, list(range(n, 2 * n)))
        diag.append(A.combine(B))
    inv = invariants(R2, diag, d)
    expected = sum(1 for c in JetRing([f"x{i}" for i in range(n)], d).monomials)
    return len(inv) == expected


# --------------------------------------------------------------- examples


def example_bialgebra() -> LieBialgebra:
    """``[e1, e2] = e2`` with ``delta(e1) = 0`` and ``delta(e2) = e1 ^ e2``."""
    h = LieAlgebra(["e1", "e2"], {(0, 1): {1: 1}})
    return LieBialgebra(h, {1: {(0, 1): Q(1)}}, name="ax+b")


def abelian_bialgebra(n: int = 2) -> LieBialgebra:
    h = LieAlgebra([f"e{i + 1}" for i in range(n)], {})
    return LieBialgebra(h, {}, name=f"abelian{n}")
