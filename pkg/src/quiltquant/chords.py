"""The algebra of horizontal chord diagrams on a named strand set.

Generators ``t^{uv}`` (one per unordered pair of strands) satisfy the
infinitesimal braid relations

    [t^{uv}, t^{wz}] = 0             for disjoint pairs,
    [t^{uv}, t^{uw} + t^{vw}] = 0.

Internally strands are positions ``0..n-1`` and a letter is a pair
``(i, j)`` with ``i < j``. The *level* of a letter is ``j``. A word is in
normal form when the levels of its letters never increase from left to
right. The rewriting rule, for letters ``x`` of lower level than ``y``,

    x y  ->  y x + [x, y]

with ``[x, y]`` written through letters of ``y``'s level, is a confluent
system whose normal words are exactly the standard monomials of a
degree-lexicographic order in which letters of lower level are larger.
:class:`RelationBasis` computes the same normal forms by brute-force row
reduction of the ideal and serves as the reference implementation.
"""

from __future__ import annotations

import itertools
import json
from functools import lru_cache
from math import factorial
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .linalg import Echelon
from .rational import Q, as_q, parse_q, q_str

__all__ = [
    "ChordError",
    "ChordSeries",
    "RelationBasis",
    "normal_form",
    "normal_words",
    "hilbert_dimension",
    "is_normal",
]

Letter = Tuple[int, int]
Word = Tuple[Letter, ...]


class ChordError(ValueError):
    pass


# ------------------------------------------------------------ rewriting core


def _level(x: Letter) -> int:
    return x[1]


def _bracket(x: Letter, y: Letter) -> Tuple[Tuple[Word, int], ...]:
    """``[x, y]`` for ``level(x) < level(y)``, in letters of level ``level(y)``."""
    i, j = x
    k, b = y
    if k == i:
        return ((((i, b), (j, b)), 1), (((j, b), (i, b)), -1))
    if k == j:
        return ((((j, b), (i, b)), 1), (((i, b), (j, b)), -1))
    return ()


@lru_cache(maxsize=None)
def _prepend(x: Letter, w: Word) -> Tuple[Tuple[Word, int], ...]:
    """Normal form of ``x w`` for a normal word ``w``; integer coefficients."""
    if not w or x[1] >= w[0][1]:
        return (((x,) + w, 1),)
    y, rest = w[0], w[1:]
    out: Dict[Word, int] = {}
    for v, c in _prepend(x, rest):
        k = (y,) + v
        out[k] = out.get(k, 0) + c
    for pair, c in _bracket(x, y):
        k = pair + rest
        out[k] = out.get(k, 0) + c
    return tuple((k, c) for k, c in out.items() if c)


@lru_cache(maxsize=None)
def _mul_words(a: Word, b: Word) -> Tuple[Tuple[Word, int], ...]:
    cur: Dict[Word, int] = {b: 1}
    for x in reversed(a):
        nxt: Dict[Word, int] = {}
        for w, c in cur.items():
            for v, k in _prepend(x, w):
                nxt[v] = nxt.get(v, 0) + c * k
        cur = {w: c for w, c in nxt.items() if c}
    return tuple(cur.items())


def is_normal(w: Word) -> bool:
    return all(w[i][1] >= w[i + 1][1] for i in range(len(w) - 1))


def _substitute(
    terms: Mapping[tuple, object],
    image: Mapping[object, Sequence[Tuple[Letter, object]]],
    trunc: int,
) -> Dict[Word, object]:
    """Apply the letter substitution ``image`` multiplicatively and renormalize.

    ``terms`` maps words over arbitrary letters to coefficients; each
    letter goes to a linear combination of degree-one normal letters.
    """
    out: Dict[Word, object] = {}
    for word, coef in terms.items():
        if len(word) > trunc:
            continue
        cur: Dict[Word, object] = {(): coef}
        for x in reversed(word):
            opts = image[x]
            nxt: Dict[Word, object] = {}
            for w, a in cur.items():
                for y, b in opts:
                    ab = a * b
                    for v, k in _prepend(y, w):
                        s = nxt.get(v)
                        nxt[v] = ab * k if s is None else s + ab * k
            cur = {w: a for w, a in nxt.items() if a}
            if not cur:
                break
        for w, a in cur.items():
            s = out.get(w)
            out[w] = a if s is None else s + a
    return {w: a for w, a in out.items() if a}


def _letter(i: int, j: int) -> Letter:
    if i == j:
        raise ChordError("a chord needs two distinct strands")
    return (i, j) if i < j else (j, i)


# ------------------------------------------------------------- chord series


class ChordSeries:
    """A truncated series ``sum_d hbar^d x_d`` with ``x_d`` of chord degree ``d``.

    The power of hbar always equals the word length, so a series is a
    map from normal words of length at most ``trunc`` to rationals.
    """

    __slots__ = ("strands", "trunc", "terms", "_index")

    def __init__(self, strands: Sequence[Hashable], trunc: int, terms: Optional[Mapping[Word, object]] = None):
        self.strands = tuple(strands)
        if len(set(self.strands)) != len(self.strands):
            raise ChordError(f"repeated strand labels {self.strands!r}")
        self.trunc = int(trunc)
        self.terms: Dict[Word, Q] = {}
        if terms:
            for w, c in terms.items():
                if len(w) <= self.trunc and c:
                    self.terms[w] = Q(c)
        self._index = None

    # construction -------------------------------------------------------
    def index(self, label: Hashable) -> int:
        if self._index is None:
            self._index = {s: i for i, s in enumerate(self.strands)}
        try:
            return self._index[label]
        except KeyError:
            raise ChordError(f"unknown strand {label!r}") from None

    @classmethod
    def one(cls, strands: Sequence[Hashable], trunc: int) -> "ChordSeries":
        return cls(strands, trunc, {(): Q(1)})

    @classmethod
    def zero(cls, strands: Sequence[Hashable], trunc: int) -> "ChordSeries":
        return cls(strands, trunc)

    @classmethod
    def chord(cls, strands: Sequence[Hashable], u: Hashable, v: Hashable, trunc: int, coef=1) -> "ChordSeries":
        s = cls(strands, trunc)
        if trunc >= 1:
            s.terms[(_letter(s.index(u), s.index(v)),)] = as_q(coef)
        return s

    @classmethod
    def from_words(cls, strands: Sequence[Hashable], trunc: int, words: Mapping[Sequence[Tuple[Hashable, Hashable]], object]) -> "ChordSeries":
        """Normal form of a combination of words given by strand-label pairs."""
        s = cls(strands, trunc)
        raw: Dict[tuple, Q] = {}
        for w, c in words.items():
            if len(w) > trunc:
                raise ChordError("word degree exceeds truncation")
            key = tuple(_letter(s.index(u), s.index(v)) for u, v in w)
            raw[key] = raw.get(key, Q(0)) + as_q(c)
        ident = {x: ((x, 1),) for w in raw for x in w}
        s.terms = _substitute(raw, ident, trunc)
        return s

    def _new(self, terms: Dict[Word, Q], trunc: Optional[int] = None) -> "ChordSeries":
        out = ChordSeries.__new__(ChordSeries)
        out.strands = self.strands
        out.trunc = self.trunc if trunc is None else trunc
        out.terms = terms
        out._index = self._index
        return out

    # basic algebra ------------------------------------------------------
    def _check(self, other: "ChordSeries") -> int:
        if self.strands != other.strands:
            raise ChordError(f"strand mismatch {self.strands!r} vs {other.strands!r}")
        return min(self.trunc, other.trunc)

    def __add__(self, other):
        if not isinstance(other, ChordSeries):
            return self + self.one(self.strands, self.trunc).scale(other)
        d = self._check(other)
        out = {w: c for w, c in self.terms.items() if len(w) <= d}
        for w, c in other.terms.items():
            if len(w) <= d:
                s = out.get(w, 0) + c
                if s:
                    out[w] = s
                else:
                    out.pop(w, None)
        return self._new(out, d)

    __radd__ = __add__

    def __neg__(self):
        return self._new({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "ChordSeries":
        c = as_q(c)
        if not c:
            return self._new({})
        return self._new({w: c * a for w, a in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, ChordSeries):
            return self.scale(other)
        d = self._check(other)
        out: Dict[Word, Q] = {}
        for wa, ca in self.terms.items():
            la = len(wa)
            if la > d:
                continue
            for wb, cb in other.terms.items():
                if la + len(wb) > d:
                    continue
                ab = ca * cb
                for w, k in _mul_words(wa, wb):
                    s = out.get(w)
                    out[w] = ab * k if s is None else s + ab * k
        return self._new({w: c for w, c in out.items() if c}, d)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, ChordSeries):
            return NotImplemented
        d = self._check(other)
        a = {w: c for w, c in self.terms.items() if len(w) <= d}
        b = {w: c for w, c in other.terms.items() if len(w) <= d}
        return a == b

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def constant(self) -> Q:
        return self.terms.get((), Q(0))

    def degree_part(self, d: int) -> "ChordSeries":
        return self._new({w: c for w, c in self.terms.items() if len(w) == d})

    def truncate(self, d: int) -> "ChordSeries":
        d = min(d, self.trunc)
        return self._new({w: c for w, c in self.terms.items() if len(w) <= d}, d)

    def with_trunc(self, d: int) -> "ChordSeries":
        """Same terms at truncation ``d`` (terms above ``d`` dropped)."""
        return self._new({w: c for w, c in self.terms.items() if len(w) <= d}, d)

    def lowest_degree(self) -> Optional[int]:
        return min((len(w) for w in self.terms), default=None)

    def power(self, n: int) -> "ChordSeries":
        out = self.one(self.strands, self.trunc)
        for _ in range(n):
            out = out * self
        return out

    # exponential, logarithm, inverse ----------------------------------
    def exp(self) -> "ChordSeries":
        if self.constant():
            raise ChordError("exp needs a series with zero constant term")
        out = self.one(self.strands, self.trunc)
        term = out
        for n in range(1, self.trunc + 1):
            term = (term * self).scale(Q(1, n))
            if term.is_zero():
                break
            out = out + term
        return out

    def log(self) -> "ChordSeries":
        if self.constant() != 1:
            raise ChordError("log needs a series with constant term 1")
        y = self - 1
        out = self.zero(self.strands, self.trunc)
        term = self.one(self.strands, self.trunc)
        for n in range(1, self.trunc + 1):
            term = term * y
            if term.is_zero():
                break
            out = out + term.scale(Q((-1) ** (n + 1), n))
        return out

    def inverse(self) -> "ChordSeries":
        c = self.constant()
        if not c:
            raise ChordError("series with zero constant term is not invertible")
        y = self.scale(1 / c) - 1
        out = self.one(self.strands, self.trunc)
        term = out
        for _ in range(self.trunc):
            term = -(term * y)
            if term.is_zero():
                break
            out = out + term
        return out.scale(1 / c)

    # operad structure --------------------------------------------------
    def _relabelled(self, new_strands: Sequence[Hashable], image) -> "ChordSeries":
        out = ChordSeries(new_strands, self.trunc)
        out.terms = _substitute(self.terms, image, self.trunc)
        return out

    def cable(self, u: Hashable, into: Sequence[Hashable]) -> "ChordSeries":
        """Replace strand ``u`` by the consecutive strands ``into``.

        ``t^{uv}`` goes to the sum of ``t^{u'v}`` over the new strands ``u'``.
        An empty ``into`` deletes the strand.
        """
        into = tuple(into)
        k = self.index(u)
        if set(into) & (set(self.strands) - {u}):
            raise ChordError("cabled strand labels collide with existing strands")
        new = self.strands[:k] + into + self.strands[k + 1 :]
        m = len(into)
        pos = lambda i: i if i < k else i + m - 1  # noqa: E731
        image = {}
        n = len(self.strands)
        for i in range(n):
            for j in range(i + 1, n):
                if i == k:
                    image[(i, j)] = [(_letter(k + r, pos(j)), 1) for r in range(m)]
                elif j == k:
                    image[(i, j)] = [(_letter(pos(i), k + r), 1) for r in range(m)]
                else:
                    image[(i, j)] = [(_letter(pos(i), pos(j)), 1)]
        return self._relabelled(new, image)

    def cable_many(self, blocks: Mapping[Hashable, Sequence[Hashable]]) -> "ChordSeries":
        """Cable several strands at once; strands not in ``blocks`` stay put."""
        new: List[Hashable] = []
        pos: Dict[int, List[int]] = {}
        for i, s in enumerate(self.strands):
            into = tuple(blocks[s]) if s in blocks else (s,)
            pos[i] = list(range(len(new), len(new) + len(into)))
            new.extend(into)
        n = len(self.strands)
        image = {}
        for i in range(n):
            for j in range(i + 1, n):
                image[(i, j)] = [(_letter(a, b), 1) for a in pos[i] for b in pos[j]]
        return self._relabelled(new, image)

    def delete(self, u: Hashable) -> "ChordSeries":
        return self.cable(u, ())

    def embed(self, mapping: Mapping[Hashable, Hashable], new_strands: Sequence[Hashable]) -> "ChordSeries":
        """Relabel strands injectively into the (larger) strand set ``new_strands``."""
        new_strands = tuple(new_strands)
        imgs = [mapping.get(s, s) for s in self.strands]
        if len(set(imgs)) != len(imgs):
            raise ChordError("strand renaming is not injective")
        idx = {s: i for i, s in enumerate(new_strands)}
        try:
            pos = [idx[s] for s in imgs]
        except KeyError as e:
            raise ChordError(f"strand {e.args[0]!r} missing from target strand set") from None
        n = len(self.strands)
        image = {(i, j): [(_letter(pos[i], pos[j]), 1)] for i in range(n) for j in range(i + 1, n)}
        return self._relabelled(new_strands, image)

    # coproduct -----------------------------------------------------------
    def coproduct(self) -> Dict[Tuple[Word, Word], Q]:
        out: Dict[Tuple[Word, Word], Q] = {}
        for w, c in self.terms.items():
            n = len(w)
            for mask in range(1 << n):
                left = tuple(w[i] for i in range(n) if mask >> i & 1)
                right = tuple(w[i] for i in range(n) if not mask >> i & 1)
                k = (left, right)
                out[k] = out.get(k, 0) + c
        return {k: c for k, c in out.items() if c}

    def is_group_like(self) -> bool:
        if self.constant() != 1:
            return False
        delta = self.coproduct()
        sq: Dict[Tuple[Word, Word], Q] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in self.terms.items():
                if len(w1) + len(w2) <= self.trunc:
                    sq[(w1, w2)] = c1 * c2
        return delta == {k: c for k, c in sq.items() if c}

    def is_primitive(self) -> bool:
        if self.constant():
            return False
        d = self.coproduct()
        expect = {}
        for w, c in self.terms.items():
            expect[(w, ())] = c
            expect[((), w)] = c
        return d == expect

    # presentation --------------------------------------------------------
    def word_labels(self, w: Word) -> Tuple[Tuple[Hashable, Hashable], ...]:
        return tuple((self.strands[i], self.strands[j]) for i, j in w)

    def sorted_terms(self) -> List[Tuple[Word, Q]]:
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def __repr__(self) -> str:
        if not self.terms:
            return f"ChordSeries(0, D={self.trunc})"
        parts = []
        for w, c in self.sorted_terms():
            name = "*".join(f"t{u},{v}" for u, v in self.word_labels(w)) or "1"
            parts.append(f"{q_str(c)}*{name}")
        return f"ChordSeries({' + '.join(parts)}, D={self.trunc})"

    def to_json_obj(self) -> dict:
        return {
            "strands": list(self.strands),
            "trunc": self.trunc,
            "terms": [
                {"word": [list(p) for p in self.word_labels(w)], "coeff": q_str(c)}
                for w, c in self.sorted_terms()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "ChordSeries":
        strands = [tuple(s) if isinstance(s, list) else s for s in obj["strands"]]
        words = {}
        for t in obj["terms"]:
            key = tuple((tuple(u) if isinstance(u, list) else u, tuple(v) if isinstance(v, list) else v) for u, v in t["word"])
            words[key] = parse_q(t["coeff"])
        return cls.from_words(strands, int(obj["trunc"]), words)

    @classmethod
    def from_json(cls, s: str) -> "ChordSeries":
        return cls.from_json_obj(json.loads(s))


def normal_form(strands: Sequence[Hashable], trunc: int, words: Mapping) -> ChordSeries:
    return ChordSeries.from_words(strands, trunc, words)


# ------------------------------------------------------------ combinatorics


def all_letters(n: int) -> List[Letter]:
    return [(i, j) for j in range(n) for i in range(j)]


def normal_words(n: int, d: int) -> List[Word]:
    """Normal words of length ``d`` on ``n`` strands."""
    letters = all_letters(n)
    out: List[Word] = []

    def rec(prefix: Word, maxlevel: int):
        if len(prefix) == d:
            out.append(prefix)
            return
        for x in letters:
            if x[1] <= maxlevel:
                rec(prefix + (x,), x[1])

    rec((), n)
    return out


def hilbert_dimension(n: int, d: int) -> int:
    """Dimension of the degree-``d`` part: complete symmetric polynomial h_d(1..n-1)."""
    if n <= 1:
        return 1 if d == 0 else 0
    total = 0
    for combo in itertools.combinations_with_replacement(range(1, n), d):
        p = 1
        for k in combo:
            p *= k
        total += p
    return total


# --------------------------------------------------------- reference basis


def _word_rank(w: Word):
    # smaller rank means larger monomial: lower level letters are larger
    return tuple((x[1], x[0]) for x in w)


class RelationBasis:
    """Degree components of the relation ideal, by explicit row reduction.

    Independent of the rewriting code: the ideal is spanned by
    ``u r v`` for every defining relation ``r`` and words ``u, v``.
    """

    _cache: Dict[Tuple[int, int], Echelon] = {}

    @staticmethod
    def relations(n: int) -> List[Dict[Word, int]]:
        rels = []
        letters = all_letters(n)
        for a, b in itertools.combinations(letters, 2):
            if not set(a) & set(b):
                rels.append({(a, b): 1, (b, a): -1})
        for i, j, k in itertools.combinations(range(n), 3):
            for x, (y, z) in (
                ((i, j), ((i, k), (j, k))),
                ((i, k), ((i, j), (j, k))),
                ((j, k), ((i, j), (i, k))),
            ):
                rels.append({(x, y): 1, (y, x): -1, (x, z): 1, (z, x): -1})
        return rels

    @classmethod
    def component(cls, n: int, d: int) -> Echelon:
        key = (n, d)
        ech = cls._cache.get(key)
        if ech is not None:
            return ech
        ech = Echelon(_word_rank)
        if d >= 2:
            letters = all_letters(n)
            rels = cls.relations(n)
            for k in range(d - 1):
                for u in itertools.product(letters, repeat=k):
                    for v in itertools.product(letters, repeat=d - 2 - k):
                        for r in rels:
                            ech.add({u + w + v: Q(c) for w, c in r.items()})
        cls._cache[key] = ech
        return ech

    @classmethod
    def dimension(cls, n: int, d: int) -> int:
        return len(all_letters(n)) ** d - len(cls.component(n, d))

    @classmethod
    def reduce(cls, n: int, vec: Mapping[Word, object]) -> Dict[Word, Q]:
        """Normal form of a homogeneous combination by ideal reduction."""
        by_deg: Dict[int, Dict[Word, Q]] = {}
        for w, c in vec.items():
            by_deg.setdefault(len(w), {})[w] = as_q(c)
        out: Dict[Word, Q] = {}
        for d, part in by_deg.items():
            out.update(cls.component(n, d).reduce(part))
        return {w: c for w, c in out.items() if c}
