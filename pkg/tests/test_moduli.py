from __future__ import annotations

import json
from fractions import Fraction

import pytest

import oracles
from helpers import associativity_failures, bracket_mismatches, exponents, functoriality_gallery, reduction_residuals, union_morphism
from quiltquant.associator import solve_associator
from quiltquant.hopf import QuantumGroup, monotone_morphism
from quiltquant.jets import JetRing
from quiltquant.liealg import Subalgebra, abelian_bialgebra, casimir, double, example_bialgebra, g_action_on_H
from quiltquant.moduli import (
    CiliatedGraph,
    HMap,
    InvariantBasis,
    ModuliError,
    SkeletizedColouredSurface,
    TensorQuant,
    apply_morphism,
    build_X_Gamma,
    classical_moduli,
    disjoint_union,
    empty_surface,
    find_slices,
    pullback_diagonal,
    quantize,
    validate,
)
from quiltquant.rational import Q
from quiltquant.spaces import Derivation, GSpace


@pytest.fixture(scope="module")
def phi():
    return solve_associator(3)


@pytest.fixture(scope="module")
def Qg(phi):
    return QuantumGroup(example_bialgebra(), phi, 2, 3)


@pytest.fixture(scope="module")
def mt(Qg):
    return Qg.mt


def point(mt, nfields, order=3):
    R = JetRing([], order)
    return GSpace(R, nfields, [Derivation(R, {}, order) for _ in range(nfields)], "point")


def colour(mt, *vecs, name="c"):
    return Subalgebra(mt.g, [{k: Q(v) for k, v in vec.items()} for vec in vecs], name)


# ---------------------------------------------------------------- graphs


def test_graph_without_cilia_at_a_vertex():
    gr = CiliatedGraph.build({"v": ["a"], "w": []})
    assert any("vertex w has no half-edges" in d for d in gr.diagnostics())


def test_graph_duplicate_labels_and_bad_edge():
    gr = CiliatedGraph.build({"v": ["a", "b"]}, {}, {"v": ("a", "b")})
    diag = gr.diagnostics()
    assert any("labels used twice: v" in d for d in diag)
    assert any("b is not a negative half-edge" in d for d in diag)


def test_graph_factors_and_render():
    gr = CiliatedGraph.build({"u": ["a", "c"]}, {"w": ["b"]}, {"e": ("a", "b")})
    assert gr.factors == ("e", "c")
    assert gr.widowed_plus == ("c",) and gr.widowed_minus == ()
    assert gr.factor_of("b") == "e" and gr.factor_of("c") == "c"
    assert gr.render().splitlines() == ["(u)+ cilia: a < c", "(w)- cilia: b", "e: a ==== b"]


# ---------------------------------------------------------------- validation


def test_valid_group_surface(Qg):
    assert validate(Qg.surface(2)) == []


def test_missing_colour_named(Qg, mt):
    G = Qg.surface(1)
    bad = SkeletizedColouredSurface(G.graph, mt.g, G.t, {}, G.spaces)
    assert "vertex v has no colour" in validate(bad)


def test_non_coisotropic_colour_named(Qg, mt):
    G = Qg.surface(1)
    line = colour(mt, {0: 1, 2: 1})
    bad = SkeletizedColouredSurface(G.graph, mt.g, G.t, {"v": line}, G.spaces)
    assert "colour of vertex v is not coisotropic" in validate(bad)


def test_non_subalgebra_colour_named(Qg, mt):
    G = Qg.surface(1)
    c = colour(mt, {1: 1}, {3: 1})
    bad = SkeletizedColouredSurface(G.graph, mt.g, G.t, {"v": c}, G.spaces)
    assert "colour of vertex v is not a subalgebra" in validate(bad)


def test_missing_and_wrong_spaces(Qg, mt):
    G = Qg.surface(1)
    spaces = {"0": G.spaces["0"], "x": G.spaces["0"]}
    diag = validate(SkeletizedColouredSurface(G.graph, mt.g, G.t, G.colours, spaces))
    assert "factor 1 has no space" in diag
    assert any("space given for x" in d for d in diag)
    spaces = {"0": G.spaces["0"], "1": point(mt, 2)}
    assert "half-edge 1: space must carry a g action" in validate(SkeletizedColouredSurface(G.graph, mt.g, G.t, G.colours, spaces))


def test_edge_space_dimension(mt):
    gr = CiliatedGraph.build({"u": ["a"]}, {"w": ["b"]}, {"e": ("a", "b")})
    full = colour(mt, {0: 1}, {1: 1}, {2: 1}, {3: 1}, name="g")
    t = casimir(mt)
    ok = SkeletizedColouredSurface(gr, mt.g, t, {"u": full, "w": full}, {"e": point(mt, 8)})
    assert validate(ok) == []
    bad = SkeletizedColouredSurface(gr, mt.g, t, {"u": full, "w": full}, {"e": point(mt, 4)})
    assert "edge e: space must carry a g + gbar action" in validate(bad)


def test_quantize_rejects_invalid_surface(Qg, mt, phi):
    G = Qg.surface(1)
    bad = SkeletizedColouredSurface(G.graph, mt.g, G.t, {}, G.spaces)
    with pytest.raises(ModuliError, match="no colour"):
        quantize(bad, phi, 1, 2)


def test_quantize_rejects_short_associator(Qg, phi):
    with pytest.raises(ModuliError, match="associator degree"):
        quantize(Qg.surface(1), phi, 4, 5)


# ---------------------------------------------------------------- X_Gamma and invariants


def test_X_gamma_of_single_half_edge(Qg, mt):
    H = Qg.H
    gr = CiliatedGraph.build({"v": ["a"]})
    G = SkeletizedColouredSurface(gr, mt.g, casimir(mt), {"v": colour(mt, {0: 1}, {1: 1})}, {"a": H})
    X = build_X_Gamma(G, 3)
    assert X.ring.names == ("a.x0", "a.x1")
    assert X.coords == {"a": [0, 1]} and X.strand_factor == {"a": "a"}
    for D, E in zip(X.strand_fields["a"], H.fields):
        assert D.equals(E.transport(X.ring, [0, 1]), 3)


def test_X_gamma_of_group_surface(Qg):
    X = build_X_Gamma(Qg.surface(1), 3)
    assert X.ring.names == ("0.x0", "0.x1", "1.x0", "1.x1")
    assert X.strand_sign == {"0": 1, "1": 1}
    assert len(X.colour_fields["v"]) == 2


def test_edge_with_point_space_is_a_point(mt, phi):
    gr = CiliatedGraph.build({"u": ["a"]}, {"w": ["b"]}, {"e": ("a", "b")})
    full = colour(mt, {0: 1}, {1: 1}, {2: 1}, {3: 1}, name="g")
    G = SkeletizedColouredSurface(gr, mt.g, casimir(mt), {"u": full, "w": full}, {"e": point(mt, 8)})
    A = quantize(G, phi, 1, 2)
    assert A.dim == 1 and A.star(0, 0) == [{0: 1}, {}]


def test_slice_and_kernel_invariants_agree(Qg):
    G = Qg.surface(2)
    X = build_X_Gamma(G, 4)
    sl = InvariantBasis(X, 4, find_slices(G, X))
    ker = InvariantBasis(X, 4, None)
    assert sl.kind == "slice" and ker.kind == "kernel"
    assert sl.degrees == ker.degrees
    fields = X.colour_fields["v"]
    for i in range(len(sl)):
        f = sl.lift(i)
        for D in fields:
            assert X.ring.truncate(D(f, 4), 3) == {}


# ---------------------------------------------------------------- classical moduli


def test_classical_group_surface_is_jets_on_H(Qg):
    C = classical_moduli(Qg.surface(1), 4)
    assert C.dim == 15
    R = C.ctx.basis.kept_ring
    mono = [R.decode(m) for m in C.ctx.basis.kept_index]
    for i in range(C.dim):
        for j in range(C.dim):
            s = C.star(i, j)
            assert len(s) == 1
            if C.degrees[i] + C.degrees[j] > 4:
                continue
            ei = R.decode(next(m for m, k in C.ctx.basis.kept_index.items() if k == i))
            ej = R.decode(next(m for m, k in C.ctx.basis.kept_index.items() if k == j))
            target = C.ctx.basis.kept_index[R.encode([a + b for a, b in zip(ei, ej)])]
            assert s[0] == {target: 1}
    assert len(set(mono)) == C.dim


def test_classical_one_leg_surface_is_constants(Qg):
    C = classical_moduli(Qg.surface(0), 4)
    assert C.dim == 1 and C.labels() == ["1"]


def test_classical_moduli_of_empty_surface(mt):
    C = classical_moduli(empty_surface(mt.g, casimir(mt)), 3)
    assert C.dim == 1 and C.ctx.basis.kind == "free"


# ---------------------------------------------------------------- star product


def test_hbar_zero_is_classical_product(Qg):
    A = Qg.A
    C = classical_moduli(Qg.surface(1), A.W)
    assert A.labels() == C.labels()
    for i in range(A.dim):
        for j in range(A.dim):
            assert A.star(i, j)[0] == C.star(i, j)[0]


def test_singleton_fibers_give_classical_product(mt, phi):
    H = g_action_on_H(mt, 5).space()
    gr = CiliatedGraph.build({"v": ["a"], "w": ["b"]})
    h = colour(mt, {0: 1}, {1: 1}, name="h")
    G = SkeletizedColouredSurface(gr, mt.g, casimir(mt), {"v": h, "w": h}, {"a": H, "b": H})
    A = quantize(G, phi, 1, 3)
    C = classical_moduli(G, A.W)
    for i in range(A.dim):
        for j in range(A.dim):
            assert A.star(i, j)[0] == C.star(i, j)[0]
            assert A.star(i, j)[1] == {}


def test_first_order_commutator_is_poisson_lie_bracket(Qg):
    assert bracket_mismatches(Qg.A, oracles.poisson_lie_ax_b(Qg.A.W - 2)) == []


def test_star_product_is_associative(Qg):
    assert associativity_failures(Qg.A) == 0


def test_corrupted_star_product_is_not_associative(Qg, phi):
    A = quantize(Qg.surface(1), phi, 2, 3)
    i, j = A.labels().index("0.x0"), A.labels().index("0.x1")
    s = A.star(i, j)
    A.star_table[(i, j)] = [dict(s[0]), {k: 2 * v for k, v in s[1].items()}, dict(s[2])]
    assert associativity_failures(A) > 0


def test_unit_is_a_unit(Qg):
    A = Qg.A
    u = A.unit_index()
    for i in range(A.dim):
        assert A.star(u, i) == A.basis_element(i) == A.star(i, u)


def test_abelian_bialgebra_is_commutative(phi):
    Qa = QuantumGroup(abelian_bialgebra(2), phi, 2, 3)
    A = Qa.A
    for i in range(A.dim):
        for j in range(A.dim):
            assert A.star(i, j) == A.star(j, i)


def test_json_object_is_serializable(Qg):
    obj = Qg.A.to_json_obj()
    assert obj["truncation"] == {"hbar_degree": 2, "jet_order": 3, "weight": 7}
    assert obj["invariants"] == "slice"
    assert obj["star"]["1,2"] == [{"4": "1"}, {"2": "-1/2"}, {"4": "1/144"}]
    json.dumps(obj)


def test_lazy_matches_complete(Qg, phi):
    lazy = quantize(Qg.surface(1), phi, 2, 3, lazy=True)
    A = Qg.A
    for i in range(A.dim):
        for j in range(A.dim):
            assert lazy.star(i, j) == A.star(i, j)


# ---------------------------------------------------------------- reduction triviality


@pytest.mark.parametrize("vecs", [[{0: 1}, {1: 1}], [{2: 1}, {3: 1}], [{0: 1}, {3: 1}], [{1: 1}, {2: 1}]], ids=["h", "h*", "e1,e2*", "e2,e1*"])
def test_chords_vanish_on_coisotropic_invariants(mt, vecs):
    H = g_action_on_H(mt, 5).space()
    assert reduction_residuals(mt, H, colour(mt, *vecs), 5, 3) == []


def test_chords_survive_for_non_coisotropic_colour(mt):
    H = g_action_on_H(mt, 5).space()
    assert reduction_residuals(mt, H, colour(mt, {0: 1, 2: 1}), 5, 3)


def test_chords_survive_on_all_jets(mt):
    H = g_action_on_H(mt, 5).space()
    assert reduction_residuals(mt, H, colour(mt, {0: 1}, {3: 1}), 5, 3, invariant=False)


# ---------------------------------------------------------------- morphisms


def test_pullback_of_identity(Qg):
    G = Qg.surface(2)
    m = monotone_morphism(G, G, {h: h for h in G.graph.half_edges})
    Rs, Rt, ims = pullback_diagonal(m, 3)
    assert ims == [Rt.var(i) for i in range(Rs.n)]


def test_pullback_of_collapse(Qg):
    m = monotone_morphism(Qg.surface(1), Qg.surface(0), {"0": "0", "1": "0"})
    Rs, Rt, ims = pullback_diagonal(m, 3)
    assert Rt.names == ("0.x0", "0.x1")
    assert ims == [Rt.var(0), Rt.var(1), Rt.var(0), Rt.var(1)]


def test_induced_map_is_a_homomorphism(Qg):
    f = Qg.tau_star((0, 2), 2)
    A, B = f.src, f.tgt
    for i in range(A.dim):
        for j in range(A.dim):
            if A.degrees[i] + A.degrees[j] > A.W:
                continue
            lhs = f.apply(A.star(i, j))
            rhs = B.clip(B.product(f.cols[i], f.cols[j]))
            assert lhs == rhs


def test_induced_map_has_classical_leading_term(Qg):
    f = Qg.tau_star((0, 2), 2)
    B = f.tgt
    labels = B.labels()
    for i, lab in enumerate(f.src.labels()):
        assert {labels[k] for k in f.cols[i][0]} == {lab}


def test_functoriality_gallery(Qg):
    for name, lhs, rhs in functoriality_gallery(Qg):
        assert lhs.difference(rhs) == [], name


def test_morphism_rejects_mismatched_truncation(Qg, phi):
    G = Qg.surface(1)
    m = monotone_morphism(G, G, {"0": "0", "1": "1"})
    other = quantize(G, phi, 1, 3)
    with pytest.raises(ModuliError, match="truncations differ"):
        apply_morphism(m, Qg.A, other, phi)


def test_morphism_rejects_other_associator(Qg):
    G = Qg.surface(1)
    m = monotone_morphism(G, G, {"0": "0", "1": "1"})
    with pytest.raises(ModuliError, match="different associator"):
        apply_morphism(m, Qg.A, Qg.A, solve_associator(3, tie_break="unit"))


def test_non_natural_morphism_is_diagnosed(Qg):
    G1, G2 = Qg.surface(1), Qg.surface(2)
    m = monotone_morphism(G1, G2, {"0": "2", "1": "0"})
    assert any("naturality" in d for d in m.diagnostics())
    with pytest.raises(ModuliError):
        apply_morphism(m, Qg.A, Qg.algebra(2), Qg.phi)


# ---------------------------------------------------------------- disjoint unions


def test_union_with_empty_surface(Qg, phi, mt):
    G = Qg.surface(1)
    U = disjoint_union([G, empty_surface(mt.g, casimir(mt))])
    A = quantize(U, phi, 2, 3)
    assert A.dim == Qg.A.dim
    for i in range(A.dim):
        for j in range(A.dim):
            assert A.star(i, j) == Qg.A.star(i, j)


def test_tensor_product_is_kronecker(Qg):
    A = Qg.A
    T = TensorQuant([A, A])
    for a, b in [(1, 2), (2, 1), (3, 4)]:
        for c, d in [(2, 1), (1, 1), (4, 2)]:
            i, j = T.index[(a, c)], T.index[(b, d)]
            want = {}
            for k1, x in enumerate(A.star(a, b)):
                for k2, y in enumerate(A.star(c, d)):
                    if k1 + k2 > A.D:
                        continue
                    for l1, u in x.items():
                        for l2, v in y.items():
                            idx = T.index.get((l1, l2))
                            if idx is not None and T.degrees[idx] <= T.W - 2 * (k1 + k2):
                                key = (k1 + k2, idx)
                                want[key] = want.get(key, 0) + u * v
            got = {(k, l): c for k, s in enumerate(T.star(i, j)) for l, c in s.items()}
            assert got == {k: v for k, v in want.items() if v}


def test_quantization_is_monoidal(Qg, phi):
    G = Qg.surface(1)
    U = disjoint_union([G, G])
    whole = quantize(U, phi, 1, 2, split=False)
    parts = quantize(U, phi, 1, 2)
    assert isinstance(parts, TensorQuant) and whole.dim == parts.dim
    A = parts.parts()[0]
    ea = exponents(A)
    by_exp = {tuple(ea[a]) + tuple(ea[b]): k for k, (a, b) in enumerate(parts.tuples)}
    perm = [by_exp[e] for e in exponents(whole)]
    for i in range(whole.dim):
        for j in range(whole.dim):
            s = whole.star(i, j)
            t = parts.star(perm[i], perm[j])
            assert [{perm[l]: c for l, c in sk.items()} for sk in s] == t


def test_union_morphism_of_identities_is_identity(Qg):
    G1 = Qg.surface(1)
    U = disjoint_union([G1, G1], ["0.", "1."])
    ident = monotone_morphism(G1, G1, {"0": "0", "1": "1"})
    m = union_morphism([(ident, "0.", "0."), (ident, "1.", "1.")], U, U)
    T = Qg.tensor(Qg.A, Qg.A)
    assert apply_morphism(m, T, T, Qg.phi) == HMap.identity(T)
