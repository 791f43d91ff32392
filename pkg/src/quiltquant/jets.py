"""Truncated polynomial (jet) algebras with exact rational coefficients.

A monomial ``x^e`` in ``n`` variables is encoded as the integer
``sum_i e_i * B**i`` with ``B = order + 1``. Since every exponent is at
most ``order`` no digit ever carries, so multiplying monomials is adding
their codes. A jet is a plain ``dict`` from codes to ``mpq``; the
:class:`JetRing` holds the degree table and the arithmetic.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .rational import Q

__all__ = ["JetRing", "Jet", "ring"]

Poly = Dict[int, "Q"]


class JetRing:
    """Polynomials in ``names`` modulo monomials of degree above ``order``."""

    def __init__(self, names: Sequence[str], order: int):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("repeated coordinate names")
        self.n = len(self.names)
        self.order = int(order)
        self.B = self.order + 1
        self.pow = [self.B**i for i in range(self.n)]
        self.deg: Dict[int, int] = {}
        self.monomials: List[int] = []
        for d in range(self.order + 1):
            for e in self._exponents(d):
                c = self.encode(e)
                self.deg[c] = d
                self.monomials.append(c)
        self._index = {nm: i for i, nm in enumerate(self.names)}

    def __repr__(self):
        return f"JetRing({', '.join(self.names)}; order={self.order})"

    def __eq__(self, other):
        return isinstance(other, JetRing) and self.names == other.names and self.order == other.order

    def __hash__(self):
        return hash((self.names, self.order))

    def _exponents(self, d: int):
        n = self.n
        if n == 0:
            if d == 0:
                yield ()
            return
        # graded reverse order: larger leading exponents first
        for combo in itertools.combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in combo:
                e[i] += 1
            yield tuple(e)

    def index(self, name: str) -> int:
        return self._index[name]

    def encode(self, e: Sequence[int]) -> int:
        return sum(x * p for x, p in zip(e, self.pow))

    def decode(self, c: int) -> Tuple[int, ...]:
        B = self.B
        out = []
        for _ in range(self.n):
            c, r = divmod(c, B)
            out.append(r)
        return tuple(out)

    def exponent(self, c: int, i: int) -> int:
        return (c // self.pow[i]) % self.B

    # -- construction
    def var(self, i) -> Poly:
        if isinstance(i, str):
            i = self._index[i]
        return {self.pow[i]: Q(1)} if self.order >= 1 else {}

    def const(self, c) -> Poly:
        return {0: Q(c)} if c else {}

    def monomial(self, e: Sequence[int], c=1) -> Poly:
        if sum(e) > self.order:
            return {}
        return {self.encode(e): Q(c)}

    # -- arithmetic on raw dicts
    def add(self, f: Mapping, g: Mapping, c=1) -> Poly:
        out = dict(f)
        for k, v in g.items():
            s = out.get(k, 0) + c * v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return out

    def iadd(self, out: Poly, g: Mapping, c=1) -> None:
        if not c:
            return
        for k, v in g.items():
            s = out.get(k, 0) + c * v
            if s:
                out[k] = s
            else:
                out.pop(k, None)

    def scale(self, f: Mapping, c) -> Poly:
        if not c:
            return {}
        return {k: c * v for k, v in f.items()}

    def truncate(self, f: Mapping, order: int) -> Poly:
        deg = self.deg
        return {k: v for k, v in f.items() if deg[k] <= order}

    def mul(self, f: Mapping, g: Mapping, order: Optional[int] = None) -> Poly:
        order = self.order if order is None else order
        deg = self.deg
        if len(f) > len(g):
            f, g = g, f
        gi = sorted(((deg[k], k, v) for k, v in g.items()))
        out: Poly = {}
        get = out.get
        for c1, a in f.items():
            lim = order - deg[c1]
            if lim < 0:
                continue
            for d2, c2, b in gi:
                if d2 > lim:
                    break
                k = c1 + c2
                out[k] = get(k, 0) + a * b
        return {k: v for k, v in out.items() if v}

    def diff(self, f: Mapping, i: int) -> Poly:
        p, B = self.pow[i], self.B
        out = {}
        for k, v in f.items():
            e = (k // p) % B
            if e:
                out[k - p] = e * v
        return out

    def degree_part(self, f: Mapping, d: int) -> Poly:
        deg = self.deg
        return {k: v for k, v in f.items() if deg[k] == d}

    def low_degree(self, f: Mapping) -> Optional[int]:
        deg = self.deg
        return min((deg[k] for k in f), default=None)

    def value_at_zero(self, f: Mapping) -> Q:
        return f.get(0, Q(0))

    def power(self, f: Mapping, n: int, order: Optional[int] = None) -> Poly:
        out = self.const(1)
        for _ in range(n):
            out = self.mul(out, f, order)
        return out

    # -- maps between rings
    def rename_map(self, target: "JetRing", mapping: Sequence[Optional[int]]):
        """Code translation for the substitution ``x_i -> y_{mapping[i]}`` (``None`` sends to zero)."""
        pw = target.pow
        B = self.B
        steps = [(self.pow[i], None if j is None else pw[j]) for i, j in enumerate(mapping)]
        cache: Dict[int, Optional[int]] = {}

        def tr(c: int) -> Optional[int]:
            hit = cache.get(c, -1)
            if hit != -1:
                return hit
            out = 0
            cc = c
            for p, q in steps:
                e = (cc // p) % B
                if e:
                    if q is None:
                        cache[c] = None
                        return None
                    out += e * q
            cache[c] = out
            return out

        return tr

    def rename(self, f: Mapping, target: "JetRing", mapping: Sequence[Optional[int]], order: Optional[int] = None, tr=None) -> Poly:
        """Pull ``f`` back along a coordinate renaming (variables may merge or vanish)."""
        order = target.order if order is None else order
        tr = tr or self.rename_map(target, mapping)
        deg = self.deg
        out: Poly = {}
        for k, v in f.items():
            if deg[k] > order:
                continue
            c = tr(k)
            if c is None:
                continue
            out[c] = out.get(c, 0) + v
        return {k: v for k, v in out.items() if v}

    def substitute(self, f: Mapping, target: "JetRing", images: Sequence[Mapping], order: Optional[int] = None) -> Poly:
        """Compose: ``f(images)`` where ``images[i]`` is a jet of ``target``.

        Images must have zero constant term so that truncation is exact.
        """
        order = target.order if order is None else order
        for im in images:
            if im.get(0):
                raise ValueError("substitution images must vanish at the origin")
        cache: Dict[int, Poly] = {0: target.const(1)}
        B = self.B

        def mono(c: int) -> Poly:
            hit = cache.get(c)
            if hit is not None:
                return hit
            # peel off one variable from the highest nonzero digit
            for i in reversed(range(self.n)):
                if (c // self.pow[i]) % B:
                    rest = mono(c - self.pow[i])
                    r = target.mul(rest, images[i], order)
                    cache[c] = r
                    return r
            raise AssertionError

        out: Poly = {}
        deg = self.deg
        for k in sorted(f, key=lambda c: deg[c]):
            if deg[k] > order:
                continue
            target.iadd(out, mono(k), f[k])
        return out

    def to_terms(self, f: Mapping) -> List[Tuple[Tuple[int, ...], Q]]:
        return sorted(((self.decode(k), v) for k, v in f.items()), key=lambda t: (sum(t[0]), tuple(-x for x in t[0])))

    def fmt(self, f: Mapping) -> str:
        if not f:
            return "0"
        parts = []
        for e, v in self.to_terms(f):
            mono = "*".join(f"{n}^{x}" if x > 1 else n for n, x in zip(self.names, e) if x)
            parts.append(f"{v}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


@lru_cache(maxsize=256)
def ring(names: Tuple[str, ...], order: int) -> JetRing:
    """Shared ring instances (degree tables are reused)."""
    return JetRing(names, order)


class Jet:
    """Convenience wrapper pairing a raw jet with its ring."""

    __slots__ = ("R", "c")

    def __init__(self, R: JetRing, c: Optional[Mapping] = None):
        self.R = R
        self.c: Poly = dict(c) if c else {}

    @classmethod
    def var(cls, R: JetRing, i) -> "Jet":
        return cls(R, R.var(i))

    @classmethod
    def const(cls, R: JetRing, c) -> "Jet":
        return cls(R, R.const(c))

    def _lift(self, o) -> Poly:
        if isinstance(o, Jet):
            return o.c
        return self.R.const(o)

    def __add__(self, o):
        return Jet(self.R, self.R.add(self.c, self._lift(o)))

    __radd__ = __add__

    def __sub__(self, o):
        return Jet(self.R, self.R.add(self.c, self._lift(o), -1))

    def __rsub__(self, o):
        return Jet(self.R, self.R.add(self._lift(o), self.c, -1))

    def __neg__(self):
        return Jet(self.R, self.R.scale(self.c, -1))

    def __mul__(self, o):
        if isinstance(o, Jet):
            return Jet(self.R, self.R.mul(self.c, o.c))
        return Jet(self.R, self.R.scale(self.c, Q(o)))

    __rmul__ = __mul__

    def __eq__(self, o):
        if isinstance(o, Jet):
            return self.c == o.c
        return self.c == self.R.const(o)

    __hash__ = None

    def __bool__(self):
        return bool(self.c)

    def diff(self, i) -> "Jet":
        if isinstance(i, str):
            i = self.R.index(i)
        return Jet(self.R, self.R.diff(self.c, i))

    def truncate(self, order: int) -> "Jet":
        return Jet(self.R, self.R.truncate(self.c, order))

    def __repr__(self):
        return f"Jet({self.R.fmt(self.c)})"
