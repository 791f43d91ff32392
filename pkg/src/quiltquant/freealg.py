"""Truncated free associative algebra on letters ``0..k-1``.

Polynomials are dicts from letter tuples to rationals. Used for the
associator's Lie series in two letters and for the BCH series.
"""

from __future__ import annotations

from typing import Dict, List, Mapping, Tuple

from .rational import Q

Poly = Dict[Tuple[int, ...], Q]

__all__ = [
    "add",
    "scale",
    "mul",
    "bracket",
    "exp",
    "log",
    "lyndon_words",
    "lyndon_bracket",
    "lyndon_basis",
    "is_lie",
    "dynkin_terms",
    "homogeneous",
]


def add(a: Mapping, b: Mapping, c=1) -> Poly:
    out = dict(a)
    for w, v in b.items():
        s = out.get(w, 0) + c * v
        if s:
            out[w] = Q(s)
        else:
            out.pop(w, None)
    return out


def scale(a: Mapping, c) -> Poly:
    c = Q(c)
    return {w: c * v for w, v in a.items()} if c else {}


def mul(a: Mapping, b: Mapping, trunc: int) -> Poly:
    out: Poly = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            if len(wa) + len(wb) <= trunc:
                w = wa + wb
                s = out.get(w, 0) + ca * cb
                if s:
                    out[w] = s
                else:
                    out.pop(w, None)
    return out


def bracket(a: Mapping, b: Mapping, trunc: int) -> Poly:
    return add(mul(a, b, trunc), mul(b, a, trunc), -1)


def homogeneous(a: Mapping, d: int) -> Poly:
    return {w: c for w, c in a.items() if len(w) == d}


def exp(a: Mapping, trunc: int) -> Poly:
    if a.get(()):
        raise ValueError("exp needs zero constant term")
    out: Poly = {(): Q(1)}
    term: Poly = {(): Q(1)}
    for n in range(1, trunc + 1):
        term = scale(mul(term, a, trunc), Q(1, n))
        if not term:
            break
        out = add(out, term)
    return out


def log(a: Mapping, trunc: int) -> Poly:
    if a.get(()) != 1:
        raise ValueError("log needs constant term 1")
    y = add(a, {(): Q(1)}, -1)
    out: Poly = {}
    term: Poly = {(): Q(1)}
    for n in range(1, trunc + 1):
        term = mul(term, y, trunc)
        if not term:
            break
        out = add(out, term, Q((-1) ** (n + 1), n))
    return out


def lyndon_words(k: int, d: int) -> List[Tuple[int, ...]]:
    """Lyndon words of length ``d`` over ``0..k-1`` in lexicographic order (Duval)."""
    out = []
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        if m == d:
            out.append(tuple(w))
        while len(w) < d:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()
    return out


def _standard_factor(w: Tuple[int, ...]) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    # w = uv with v the longest proper Lyndon suffix
    for i in range(1, len(w)):
        v = w[i:]
        if _is_lyndon(v):
            return w[:i], v
    raise ValueError("word of length one has no factorization")


def _is_lyndon(w: Tuple[int, ...]) -> bool:
    return all(w < w[i:] for i in range(1, len(w)))


def lyndon_bracket(w: Tuple[int, ...]) -> Poly:
    """The standard bracketing of a Lyndon word, expanded in the free algebra."""
    if len(w) == 1:
        return {w: Q(1)}
    u, v = _standard_factor(w)
    return bracket(lyndon_bracket(u), lyndon_bracket(v), len(w))


def lyndon_basis(k: int, d: int) -> List[Tuple[Tuple[int, ...], Poly]]:
    return [(w, lyndon_bracket(w)) for w in lyndon_words(k, d)]


def _left_normed(w: Tuple[int, ...]) -> Poly:
    p: Poly = {w[:1]: Q(1)}
    for x in w[1:]:
        p = bracket(p, {(x,): Q(1)}, len(w))
    return p


def is_lie(a: Mapping) -> bool:
    """Dynkin-Specht-Wever test: each homogeneous part ``P_d`` satisfies
    ``sum_w c_w [w] = d * P_d`` with left-normed brackets ``[w]``."""
    for d in {len(w) for w in a}:
        if d == 0:
            return False
        part = homogeneous(a, d)
        acc: Poly = {}
        for w, c in part.items():
            acc = add(acc, _left_normed(w), c)
        if acc != scale(part, d):
            return False
    return True


def dynkin_terms(a: Mapping) -> Dict[Tuple[int, ...], Q]:
    """Coefficients ``c_w / d`` so that ``a = sum (c_w/d) [w]`` for a Lie ``a``."""
    return {w: c / len(w) for w, c in a.items() if w}
