"""Shared constructions for the moduli, Hopf and acceptance tests."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import oracles

from quiltquant.chords import ChordSeries
from quiltquant.jets import JetRing
from quiltquant.liealg import ManinTriple, Subalgebra, casimir
from quiltquant.moduli import HMap, SkeletizedColouredSurface, SurfaceMorphism, apply_morphism, disjoint_union, tensor_maps
from quiltquant.hopf import QuantumGroup, monotone_morphism
from quiltquant.ordcat import OrderedMorphism
from quiltquant.spaces import Derivation, GSpace, StrandBinding, act_chord, apply_sequence, invariants


# ---------------------------------------------------------------- quantized algebras


def exponents(A) -> List[Tuple[int, ...]]:
    """Exponent vector of each basis element of a kept-monomial algebra."""
    R = A.ctx.basis.kept_ring
    inv = {k: m for m, k in A.ctx.basis.kept_index.items()}
    return [R.decode(inv[i]) for i in range(A.dim)]


def associativity_failures(A) -> int:
    """Number of basis triples where ``(xy)z != x(yz)`` within the trusted weight."""
    bad = 0
    e = A.basis_element
    for i in range(A.dim):
        for j in range(A.dim):
            if A.degrees[i] + A.degrees[j] > A.W:
                continue
            xy = A.product(e(i), e(j))
            for k in range(A.dim):
                if A.degrees[i] + A.degrees[j] + A.degrees[k] > A.W:
                    continue
                if A.clip(A.product(xy, e(k))) != A.clip(A.product(e(i), A.product(e(j), e(k)))):
                    bad += 1
    return bad


def bracket_mismatches(A, p: Dict[Tuple[int, int], Fraction]) -> List[Tuple[str, str]]:
    """Pairs whose first-order commutator differs from ``{x0, x1} = p``.

    Only the part known at weight ``W - 2`` is compared.
    """
    mono = exponents(A)
    index = {m: i for i, m in enumerate(mono)}
    bad = []
    for i, (a0, a1) in enumerate(mono):
        for j, (b0, b1) in enumerate(mono):
            if A.degrees[i] + A.degrees[j] > A.W:
                continue
            s, t = A.star(i, j)[1], A.star(j, i)[1]
            got = {k: s.get(k, 0) - t.get(k, 0) for k in set(s) | set(t)}
            got = {k: v for k, v in got.items() if v and A.degrees[k] <= A.W - 2}
            # {x^a, x^b} = p(x) (d0 x^a d1 x^b - d1 x^a d0 x^b)
            want: Dict[int, Fraction] = {}
            jac = a0 * b1 - a1 * b0
            if jac:
                for (m0, m1), c in p.items():
                    k = index.get((a0 + b0 - 1 + m0, a1 + b1 - 1 + m1))
                    if k is not None and A.degrees[k] <= A.W - 2:
                        want[k] = want.get(k, 0) + Fraction(c) * jac
            if got != want:
                bad.append((A.labels()[i], A.labels()[j]))
    return bad


def group_law(name: str, order: int):
    """The formal group law of ``H`` as two exponent dicts over ``(a0, a1, b0, b1)``."""
    if name == "abelian":
        return {(1, 0, 0, 0): 1, (0, 0, 1, 0): 1}, {(0, 1, 0, 0): 1, (0, 0, 0, 1): 1}
    return oracles.group_law_ax_b(order)


def as_poly(col, tgt, ea, eb) -> Dict[Tuple[int, ...], object]:
    """An hbar^0 column on a two-factor tensor product as an exponent dict."""
    out: Dict[Tuple[int, ...], object] = {}
    for l, c in col.items():
        a, b = tgt.tuples[l]
        e = tuple(ea[a]) + tuple(eb[b])
        out[e] = out.get(e, 0) + c
    return {e: c for e, c in out.items() if c}


def classical_coproduct_mismatches(Qg: QuantumGroup, law: str) -> List[str]:
    A, W = Qg.A, Qg.W
    z0, z1 = group_law(law, W)
    delta = Qg.coproduct()
    e = exponents(A)
    bad = []
    for i, (p, q) in enumerate(e):
        want = oracles.pmul(oracles.ppow(z0, p, 4, W), oracles.ppow(z1, q, 4, W), W)
        if as_poly(delta.cols[i][0], delta.tgt, e, e) != want:
            bad.append(A.labels()[i])
    return bad


def classical_coaction_mismatches(Qg: QuantumGroup, data) -> List[str]:
    """Compare ``rho`` at hbar^0 with ``m -> g(bch(m, -a))`` for the ax+b group acting on itself."""
    A, B, rho, W = data.A, data.B, data.rho, Qg.W
    z0, z1 = oracles.group_law_ax_b(W)

    # swap the arguments of the law and negate a
    def at(z):
        return {k[2:] + k[:2]: c * (-1) ** (k[2] + k[3]) for k, c in z.items()}

    w0, w1 = at(z0), at(z1)
    ea, eb = exponents(A), exponents(B)
    bad = []
    for i, (p, q) in enumerate(eb):
        want = oracles.pmul(oracles.ppow(w0, p, 4, W), oracles.ppow(w1, q, 4, W), W)
        if as_poly(rho.cols[i][0], rho.tgt, ea, eb) != want:
            bad.append(B.labels()[i])
    return bad


# ---------------------------------------------------------------- morphisms


def union_morphism(
    parts: Sequence[Tuple[SurfaceMorphism, str, str]],
    src: SkeletizedColouredSurface,
    tgt: SkeletizedColouredSurface,
) -> SurfaceMorphism:
    """``m_1 + ... + m_r`` for morphisms between positive one-vertex-side surfaces.

    ``parts`` lists ``(m, source prefix, target prefix)``.
    """
    aV: Dict[str, str] = {}
    aH: Dict[str, str] = {}
    for m, ps, pt in parts:
        aV.update({ps + v: pt + m.phi_V_plus(v) for v in m.source.graph.V_plus})
        aH.update({ps + h: pt + m.phi_H_plus(h) for h in m.source.graph.H_plus})
    gs, gt = src.graph, tgt.graph
    pV = OrderedMorphism.from_assignment(aV, gt.V_plus, gs.V_plus)
    pH = OrderedMorphism.from_assignment(aH, gt.H_plus, gs.H_plus)
    empty = OrderedMorphism.from_fibers({})
    return SurfaceMorphism(src, tgt, pV, empty, pH, empty, name="union")


def functoriality_gallery(Qg: QuantumGroup) -> List[Tuple[str, HMap, HMap]]:
    """Five pairs ``(name, lhs, rhs)`` that agree when the quantization is a monoidal functor."""
    phi = Qg.phi
    S = Qg.surface
    out = []

    # identity morphism
    G2 = S(2)
    ident = monotone_morphism(G2, G2, {h: h for h in G2.graph.half_edges})
    out.append(("identity", apply_morphism(ident, Qg.algebra(2), Qg.algebra(2), phi), HMap.identity(Qg.algebra(2))))

    # (0,2) then (0,1,3), against (0,3)
    lhs = Qg.tau_star((0, 1, 3), 3).compose(Qg.tau_star((0, 2), 2))
    out.append(("composition 1 -> 2 -> 3", lhs, Qg.tau_star((0, 3), 3)))

    # through the point: (0,0) then (1,), against (1,1)
    lhs = Qg.tau_star((1,), 1).compose(Qg.tau_star((0, 0), 0))
    out.append(("composition through 0", lhs, Qg.tau_star((1, 1), 1)))

    # disjoint union of two morphisms against the tensor product of their maps
    G1 = S(1)
    U = disjoint_union([G1, G1], ["0.", "1."])
    V = disjoint_union([S(0), S(2)], ["0.", "1."])
    f1 = monotone_morphism(G1, S(0), {"0": "0", "1": "0"})
    f2 = monotone_morphism(G1, S(2), {"0": "0", "1": "2"})
    AU = Qg.tensor(Qg.A, Qg.A)
    AV = Qg.tensor(Qg.algebra(0), Qg.algebra(2))
    m = union_morphism([(f1, "0.", "0."), (f2, "1.", "1.")], U, V)
    lhs = apply_morphism(m, AU, AV, phi)
    rhs = tensor_maps([Qg.tau_star((0, 0), 0), Qg.tau_star((0, 2), 2)], AU, AV)
    out.append(("disjoint union", lhs, rhs))

    # a union morphism followed by a morphism out of the union
    W_ = disjoint_union([G1, S(0)], ["0.", "1."])
    ident1 = monotone_morphism(G1, G1, {"0": "0", "1": "1"})
    g0 = monotone_morphism(G1, S(0), {"0": "0", "1": "0"})
    first = union_morphism([(ident1, "0.", "0."), (g0, "1.", "1.")], U, W_)
    second = monotone_morphism(W_, S(2), {"0.0": "0", "0.1": "1", "1.0": "2"})
    direct = monotone_morphism(U, S(2), {"0.0": "0", "0.1": "1", "1.0": "2", "1.1": "2"})
    AW = Qg.tensor(Qg.A, Qg.algebra(0))
    lhs = apply_morphism(second, AW, Qg.algebra(2), phi).compose(apply_morphism(first, AU, AW, phi))
    out.append(("union then merge", lhs, apply_morphism(direct, AU, Qg.algebra(2), phi)))
    return out


# ---------------------------------------------------------------- reduction


def subalgebra_fields(H: GSpace, c: Subalgebra, order: int) -> List[Derivation]:
    out = []
    for xi in c.basis():
        acc = Derivation(H.ring, {}, order)
        for a, v in xi.items():
            acc = acc.combine(H.fields[a], v)
        out.append(acc)
    return out


def reduction_residuals(mt: ManinTriple, H: GSpace, c: Subalgebra, order: int, degree: int, invariant: bool = True) -> List[Tuple]:
    """Nonzero matrix entries of every chord ``t^{uv}`` on ``X^{c+c} (x) Y^{c+c}``.

    ``X = Y = O(H) (x) O(H)``, so there are four strands, each acting on
    its own copy of ``H``. Inputs are products of per-copy
    ``c``-invariants computed to jet order ``order``; outputs are
    compared up to total degree ``degree``. With ``invariant=False`` the
    inputs are all monomials instead (a negative control).
    """
    t = casimir(mt).t
    n = H.ring.n
    R = JetRing([f"{s}.{nm}" for s in range(4) for nm in H.ring.names], order)
    per = [tuple(f.transport(R, list(range(s * n, (s + 1) * n))) for f in H.fields) for s in range(4)]
    if invariant:
        base = invariants(H.ring, subalgebra_fields(H, c, order), order)
    else:
        base = [{m: 1} for m in H.ring.monomials if H.ring.deg[m] <= order]
    lowest = [min(H.ring.deg[m] for m in f) for f in base]
    inputs = []
    for combo in itertools.product(range(len(base)), repeat=4):
        if sum(lowest[i] for i in combo) > order:
            continue
        f = R.const(1)
        for s, i in enumerate(combo):
            f = R.mul(f, H.ring.rename(base[i], R, list(range(s * n, (s + 1) * n))))
        inputs.append((combo, f))
    strands = ("1", "2", "3", "4")
    bindings = {s: StrandBinding(0, per[k]) for k, s in enumerate(strands)}
    bad = []
    for u, v in itertools.combinations(strands, 2):
        op = act_chord(ChordSeries.chord(strands, u, v, 1), bindings, t)
        for combo, f in inputs:
            out: Dict = {}
            for (_, slots), coef in op.terms.items():
                for mono, a in apply_sequence(op, slots[0], f, order).items():
                    if R.deg[mono] <= degree:
                        out[mono] = out.get(mono, 0) + coef * a
            out = {mono: a for mono, a in out.items() if a}
            if out:
                bad.append(((u, v), combo, out))
    return bad
