"""Independent reference computations used by the tests.

Nothing here imports the package's algebra: words, ideals, series and
row reduction are redone from scratch with ``fractions.Fraction`` so that
agreement with the package is evidence rather than tautology.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

Word = Tuple[Tuple[int, int], ...]


# ---------------------------------------------------------------- row reduction


class Reducer:
    """Incremental exact row reduction over ``Fraction`` keyed by hashable columns."""

    def __init__(self):
        self.rows: Dict[object, Dict[object, Fraction]] = {}

    def reduce(self, v: Dict) -> Dict:
        v = {k: Fraction(c) for k, c in v.items() if c}
        changed = True
        while changed:
            changed = False
            for piv, row in self.rows.items():
                c = v.get(piv)
                if c:
                    for k, a in row.items():
                        v[k] = v.get(k, 0) - c * a
                        if not v[k]:
                            del v[k]
                    changed = True
        return v

    def add(self, v: Dict) -> bool:
        v = self.reduce(v)
        if not v:
            return False
        piv = min(v, key=repr)
        c = v[piv]
        row = {k: a / c for k, a in v.items()}
        for p, r in self.rows.items():
            a = r.get(piv)
            if a:
                for k, b in row.items():
                    r[k] = r.get(k, 0) - a * b
                    if not r[k]:
                        del r[k]
        self.rows[piv] = row
        return True

    def __len__(self):
        return len(self.rows)


def rank(vectors) -> int:
    r = Reducer()
    for v in vectors:
        r.add(v)
    return len(r)


def solve_linear(equations: List[Dict[str, Fraction]], unknowns: Sequence[str]) -> Dict[str, Fraction]:
    """Solve ``sum_u e[u] * u + e['1'] = 0`` for a unique solution (raises otherwise)."""
    import sympy

    syms = sympy.symbols(list(unknowns))
    eqs = [sum(sympy.Rational(c.numerator, c.denominator) * (syms[unknowns.index(u)] if u != "1" else 1) for u, c in e.items()) for e in equations]
    sol = sympy.solve(eqs, syms, dict=True)
    assert len(sol) == 1 and set(map(str, sol[0])) == set(unknowns), sol
    return {str(k): Fraction(int(v.p), int(v.q)) for k, v in sol[0].items()}


# ---------------------------------------------------------------- chord words


def letters(n: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def relations(n: int) -> List[Dict[Word, int]]:
    """Infinitesimal braid relations written out from their definition."""
    out = []
    L = letters(n)

    def comm(x, y):
        return {(x, y): 1, (y, x): -1}

    def add(a, b):
        r = dict(a)
        for k, c in b.items():
            r[k] = r.get(k, 0) + c
        return r

    for x, y in itertools.combinations(L, 2):
        if not set(x) & set(y):
            out.append(comm(x, y))
    for i, j, k in itertools.permutations(range(n), 3):
        if i < j:
            ij = (i, j)
            ik = tuple(sorted((i, k)))
            jk = tuple(sorted((j, k)))
            out.append(add(comm(ij, ik), comm(ij, jk)))
    return out


def ideal(n: int, d: int) -> Reducer:
    """Degree-``d`` component of the two-sided ideal."""
    red = Reducer()
    L = letters(n)
    rels = relations(n)
    for k in range(max(d - 1, 0)):
        for u in itertools.product(L, repeat=k):
            for v in itertools.product(L, repeat=d - 2 - k):
                for r in rels:
                    red.add({u + w + v: c for w, c in r.items()})
    return red


_IDEALS: Dict[Tuple[int, int], Reducer] = {}


def in_ideal(n: int, vec: Dict[Word, Fraction]) -> bool:
    by_deg: Dict[int, Dict[Word, Fraction]] = {}
    for w, c in vec.items():
        if c:
            by_deg.setdefault(len(w), {})[w] = Fraction(c)
    for d, part in by_deg.items():
        if d < 2:
            if part:
                return False
            continue
        if (n, d) not in _IDEALS:
            _IDEALS[(n, d)] = ideal(n, d)
        if _IDEALS[(n, d)].reduce(part):
            return False
    return True


def quotient_dimension(n: int, d: int) -> int:
    return len(letters(n)) ** d - (len(ideal(n, d)) if d >= 2 else 0)


# ---------------------------------------------------------------- free series


def fmul(a: Dict, b: Dict, trunc: int) -> Dict:
    out: Dict = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            if len(wa) + len(wb) <= trunc:
                w = wa + wb
                out[w] = out.get(w, 0) + Fraction(ca) * Fraction(cb)
    return {w: c for w, c in out.items() if c}


def fadd(a: Dict, b: Dict, s=1) -> Dict:
    out = {w: Fraction(c) for w, c in a.items()}
    for w, c in b.items():
        out[w] = out.get(w, 0) + s * Fraction(c)
    return {w: c for w, c in out.items() if c}


def fexp(x: Dict, trunc: int) -> Dict:
    out = {(): Fraction(1)}
    term = {(): Fraction(1)}
    for k in range(1, trunc + 1):
        term = {w: c / k for w, c in fmul(term, x, trunc).items()}
        out = fadd(out, term)
    return out


def flog(a: Dict, trunc: int) -> Dict:
    z = fadd(a, {(): 1}, -1)
    out: Dict = {}
    power = {(): Fraction(1)}
    for k in range(1, trunc + 1):
        power = fmul(power, z, trunc)
        out = fadd(out, {w: c * Fraction((-1) ** (k + 1), k) for w, c in power.items()})
    return out


# ---------------------------------------------------------------- matrices with jet entries


def bch_matrix_oracle(X, Y, order: int):
    """``log(exp X exp Y)`` for sympy matrices of polynomials, truncated in total degree.

    Entries are polynomials with no constant term, so the series terminate
    after ``order`` factors once higher degrees are dropped.
    """
    import sympy

    def trunc(M):
        def t(e):
            p = sympy.Poly(sympy.expand(e), *gens) if gens else None
            if p is None:
                return e
            return sum((c * sympy.prod([g**k for g, k in zip(gens, m)]) for m, c in p.terms() if sum(m) <= order), sympy.Integer(0))

        return M.applyfunc(t)

    gens = sorted((X.free_symbols | Y.free_symbols), key=str)
    n = X.shape[0]
    I = sympy.eye(n)

    def mexp(A):
        out, term = I, I
        for k in range(1, order + 1):
            term = trunc(term * A / k)
            out = out + term
        return trunc(out)

    def mlog(B):
        Z = B - I
        out, power = sympy.zeros(n), I
        for k in range(1, order + 1):
            power = trunc(power * Z)
            out = out + power * sympy.Rational((-1) ** (k + 1), k)
        return trunc(out)

    return mlog(trunc(mexp(X) * mexp(Y)))


# ---------------------------------------------------------------- Poisson-Lie bracket


@lru_cache(maxsize=None)
def poisson_lie_ax_b(order: int) -> Dict[Tuple[int, int], Fraction]:
    """Coefficients of ``p`` with ``{x0, x1} = p(x)`` on the ax+b group.

    Coordinates are ``log g = x0 E11 + x1 E12``. ``p`` is the unique
    solution, up to degree ``order``, of multiplicativity
    ``p(z(a, b)) = p(a) J_a z + p(b) J_b z`` (``z`` the group law,
    ``J`` the Jacobian determinants) whose linear part is ``-x1``.
    """
    import sympy

    a0, a1, b0, b1 = gens = sympy.symbols("a0 a1 b0 b1")
    Z = bch_matrix_oracle(sympy.Matrix([[a0, a1], [0, 0]]), sympy.Matrix([[b0, b1], [0, 0]]), order)
    z0, z1 = (sympy.Poly(Z[0, k], *gens) for k in range(2))

    def trunc(p):
        return sympy.Poly.from_dict({m: c for m, c in p.as_dict().items() if sum(m) <= order}, *gens) if not p.is_zero else p

    Ja = trunc(z0.diff(a0) * z1.diff(a1) - z0.diff(a1) * z1.diff(a0))
    Jb = trunc(z0.diff(b0) * z1.diff(b1) - z0.diff(b1) * z1.diff(b0))
    one = sympy.Poly(1, *gens)
    pw0, pw1 = [one], [one]
    for _ in range(order):
        pw0.append(trunc(pw0[-1] * z0))
        pw1.append(trunc(pw1[-1] * z1))
    monos = [(i, d - i) for d in range(1, order + 1) for i in range(d + 1)]
    residual: Dict = {}
    for m in monos:
        lhs = trunc(pw0[m[0]] * pw1[m[1]])
        pa = sympy.Poly(a0 ** m[0] * a1 ** m[1], *gens)
        pb = sympy.Poly(b0 ** m[0] * b1 ** m[1], *gens)
        r = trunc(lhs - pa * Ja - pb * Jb)
        for k, c in r.as_dict().items():
            residual.setdefault(k, {})[f"c{m[0]}_{m[1]}"] = Fraction(int(c.p), int(c.q))
    eqs = list(residual.values())
    eqs.append({"c1_0": Fraction(1)})
    eqs.append({"c0_1": Fraction(1), "1": Fraction(1)})
    sol = solve_linear(eqs, [f"c{i}_{j}" for i, j in monos])
    return {m: sol[f"c{m[0]}_{m[1]}"] for m in monos if sol[f"c{m[0]}_{m[1]}"]}


@lru_cache(maxsize=None)
def group_law_ax_b(order: int) -> Tuple[Dict[Tuple[int, ...], Fraction], Dict[Tuple[int, ...], Fraction]]:
    """``z(a, b) = log(exp a exp b)`` on ax+b as exponent dicts over ``(a0, a1, b0, b1)``."""
    import sympy

    gens = sympy.symbols("a0 a1 b0 b1")
    a0, a1, b0, b1 = gens
    Z = bch_matrix_oracle(sympy.Matrix([[a0, a1], [0, 0]]), sympy.Matrix([[b0, b1], [0, 0]]), order)
    out = []
    for k in range(2):
        P = sympy.Poly(Z[0, k], *gens)
        out.append({m: Fraction(int(c.p), int(c.q)) for m, c in P.as_dict().items() if c})
    return out[0], out[1]


def pmul(f: Dict, g: Dict, order: int) -> Dict:
    """Product of exponent-dict polynomials truncated above total degree ``order``."""
    out: Dict = {}
    for a, x in f.items():
        for b, y in g.items():
            e = tuple(i + j for i, j in zip(a, b))
            if sum(e) <= order:
                out[e] = out.get(e, 0) + Fraction(x) * Fraction(y)
    return {e: c for e, c in out.items() if c}


def ppow(f: Dict, n: int, nvars: int, order: int) -> Dict:
    out = {(0,) * nvars: Fraction(1)}
    for _ in range(n):
        out = pmul(out, f, order)
    return out


# ---------------------------------------------------------------- dense associator oracle


A_, B_ = 0, 1


def _phi_letter(x, y, z, word):
    """Word in A = t^{xy}, B = t^{yz} as a chord word on three or four strands (0-based)."""
    out = []
    for letter in word:
        u, v = (x, y) if letter == A_ else (y, z)
        pairs = [tuple(sorted((a, b))) for a in u for b in v]
        out.append(pairs)
    return out


def _expand(word_choices):
    """Multilinear expansion of a word whose letters are sums of chords."""
    return [tuple(c) for c in itertools.product(*word_choices)]


def _phi_image(coeffs, x, y, z):
    """``Phi_2^{x,y,z}`` with unknown coefficients: map word -> {unknown: 1}."""
    out = {}
    for name, word in coeffs.items():
        for w in _expand(_phi_letter(x, y, z, word)):
            out.setdefault(w, {}).setdefault(name, 0)
            out[w][name] += 1
    return out


def _accumulate(target, image, sign):
    for w, cs in image.items():
        slot = target.setdefault(w, {})
        for u, c in cs.items():
            slot[u] = slot.get(u, 0) + sign * c


def _const(target, free, sign=1):
    for w, c in free.items():
        slot = target.setdefault(w, {})
        slot["1"] = slot.get("1", 0) + sign * Fraction(c)


def _ideal_equations(n, residual, unknowns):
    """Linear equations on the unknowns expressing ``residual in ideal``."""
    red = ideal(n, 2)
    cols = {}
    for u in list(unknowns) + ["1"]:
        cols[u] = red.reduce({w: cs.get(u, 0) for w, cs in residual.items()})
    words = sorted({w for v in cols.values() for w in v})
    return [{u: cols[u].get(w, 0) for u in cols} for w in words]


def dense_degree_two():
    """Solve the degree-2 constraints over all four two-letter words.

    The degree-1 part is zero (checked separately), so in degree 2 each
    constraint is linear in ``Phi_2``.
    """
    words = {"AA": (A_, A_), "AB": (A_, B_), "BA": (B_, A_), "BB": (B_, B_)}
    eqs = []

    def e(p, q):
        return {((p, q),): Fraction(1, 2)}

    # first hexagon: exp((t13+t23)/2) = Phi^{312} e^{t13/2} Phi^{132,-1} e^{t23/2} Phi^{123}
    res = {}
    for (x, y, z), s in ((((2,), (0,), (1,)), 1), (((0,), (2,), (1,)), -1), (((0,), (1,), (2,)), 1)):
        _accumulate(res, _phi_image(words, x, y, z), s)
    lhs = fexp(fadd(e(0, 2), e(1, 2)), 2)
    rhs = fmul(fexp(e(0, 2), 2), fexp(e(1, 2), 2), 2)
    _const(res, {w: c for w, c in fadd(rhs, lhs, -1).items() if len(w) == 2})
    eqs += _ideal_equations(3, res, words)
    # second hexagon: exp((t12+t13)/2) = Phi^{231,-1} e^{t13/2} Phi^{213} e^{t12/2} Phi^{123,-1}
    res = {}
    for (x, y, z), s in ((((1,), (2,), (0,)), -1), (((1,), (0,), (2,)), 1), (((0,), (1,), (2,)), -1)):
        _accumulate(res, _phi_image(words, x, y, z), s)
    lhs = fexp(fadd(e(0, 1), e(0, 2)), 2)
    rhs = fmul(fexp(e(0, 2), 2), fexp(e(0, 1), 2), 2)
    _const(res, {w: c for w, c in fadd(rhs, lhs, -1).items() if len(w) == 2})
    eqs += _ideal_equations(3, res, words)
    # pentagon, linear in degree 2
    res = {}
    for blocks, s in (
        (((0,), (1,), (2, 3)), 1),
        (((0, 1), (2,), (3,)), 1),
        (((1,), (2,), (3,)), -1),
        (((0,), (1, 2), (3,)), -1),
        (((0,), (1,), (2,)), -1),
    ):
        _accumulate(res, _phi_image(words, *blocks), s)
    eqs += _ideal_equations(4, res, words)
    # units: deleting an outer strand kills A or B
    eqs += [{"AA": 1}, {"BB": 1}]
    return solve_linear(eqs, list(words))
