"""Sparse exact linear algebra over the rationals.

Vectors are ``dict`` objects mapping hashable column keys to nonzero
``mpq`` values. The central routine is an incremental Gauss-Jordan
elimination whose result is the unique reduced row echelon form for a
given column order, so every consumer is deterministic.
"""

from __future__ import annotations

from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .rational import Q

Vec = Dict[Hashable, "Q"]

__all__ = [
    "Inconsistent",
    "Echelon",
    "EchelonSolver",
    "axpy",
    "solve",
    "kernel",
    "rank",
]


class Inconsistent(ValueError):
    """Raised when an affine system has no solution."""


def axpy(y: Vec, a, x: Mapping) -> None:
    """In place ``y += a*x`` dropping zeros."""
    for k, v in x.items():
        s = y.get(k)
        if s is None:
            y[k] = a * v
        else:
            s = s + a * v
            if s:
                y[k] = s
            else:
                del y[k]


class Echelon:
    """Rows kept in reduced row echelon form with respect to ``rank_of``.

    ``rank_of`` maps a column key to a sortable value; the pivot of a row
    is its column of smallest rank.
    """

    def __init__(self, rank_of: Callable[[Hashable], object]):
        self.rank_of = rank_of
        self.rows: Dict[Hashable, Vec] = {}

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, vec: Mapping) -> Vec:
        out = dict(vec)
        for p in [c for c in out if c in self.rows]:
            a = out.get(p)
            if a:
                axpy(out, -a, self.rows[p])
        return out

    def add(self, vec: Mapping) -> Optional[Hashable]:
        """Insert ``vec``; return its new pivot or ``None`` if dependent."""
        r = self.reduce(vec)
        if not r:
            return None
        p = min(r, key=self.rank_of)
        inv = 1 / r[p]
        r = {k: v * inv for k, v in r.items()}
        for row in self.rows.values():
            a = row.get(p)
            if a:
                axpy(row, -a, r)
        self.rows[p] = r
        return p

    def pivots(self) -> List[Hashable]:
        return sorted(self.rows, key=self.rank_of)


_RHS = ("__rhs__",)


def _order_rank(order: Sequence[Hashable]):
    pos = {c: i for i, c in enumerate(order)}
    n = len(pos)
    return lambda c: pos.get(c, n)


def _equations(columns: Mapping[Hashable, Mapping]) -> Dict[Hashable, Vec]:
    rows: Dict[Hashable, Vec] = {}
    for unknown, image in columns.items():
        for eq, a in image.items():
            if a:
                rows.setdefault(eq, {})[unknown] = a
    return rows


def solve(
    columns: Mapping[Hashable, Mapping],
    rhs: Mapping,
    order: Optional[Sequence[Hashable]] = None,
) -> Vec:
    """Solve ``sum_j x_j columns[j] = rhs`` with free unknowns set to zero.

    ``order`` fixes the column order used for pivoting (default: the
    iteration order of ``columns``); it is the tie-break between solutions.
    """
    order = list(columns) if order is None else list(order)
    ech = Echelon(_order_rank(order))
    rows = _equations(columns)
    for eq, b in rhs.items():
        if b:
            rows.setdefault(eq, {})[_RHS] = b
    for eq in rows:
        ech.add(rows[eq])
    if _RHS in ech.rows:
        raise Inconsistent("affine system has no solution")
    return {p: row[_RHS] for p, row in ech.rows.items() if row.get(_RHS)}


def kernel(
    columns: Mapping[Hashable, Mapping],
    order: Optional[Sequence[Hashable]] = None,
) -> List[Vec]:
    """Basis of the kernel of the map ``x -> sum_j x_j columns[j]``.

    Each basis vector has exactly one nonzero free coordinate (equal to
    1); free coordinates are the non-pivot unknowns under ``order``.
    Vectors are returned in ``order`` of their free coordinate.
    """
    order = list(columns) if order is None else list(order)
    ech = Echelon(_order_rank(order))
    for row in _equations(columns).values():
        ech.add(row)
    basis = []
    for f in order:
        if f in ech.rows:
            continue
        v = {f: Q(1)}
        for p, row in ech.rows.items():
            a = row.get(f)
            if a:
                v[p] = -a
        basis.append(v)
    return basis


def rank(vectors: Iterable[Mapping], key: Callable = repr) -> int:
    ech = Echelon(key)
    for v in vectors:
        ech.add(v)
    return len(ech)


class EchelonSolver:
    """Row-echelon elimination of columns that remembers combinations.

    Columns are added with a tag; each stored vector is a combination of
    the added columns with a distinct leading key (the key of smallest
    rank). :meth:`solve` writes a vector as a combination of the tags.
    No back-reduction is performed, so sparse triangular systems stay
    sparse.
    """

    def __init__(self, rank_of: Callable[[Hashable], object]):
        self.rank_of = rank_of
        self.rows: Dict[Hashable, Tuple[Vec, Vec]] = {}

    def _lead(self, vec: Mapping):
        return min(vec, key=self.rank_of)

    def add(self, vec: Mapping, tag: Hashable) -> Optional[Hashable]:
        v: Vec = {k: c for k, c in vec.items() if c}
        combo: Vec = {tag: Q(1)}
        while v:
            lead = self._lead(v)
            hit = self.rows.get(lead)
            if hit is None:
                inv = 1 / v[lead]
                self.rows[lead] = ({k: c * inv for k, c in v.items()}, {k: c * inv for k, c in combo.items()})
                return lead
            a = -v[lead]
            axpy(v, a, hit[0])
            axpy(combo, a, hit[1])
        return None

    def solve(self, vec: Mapping, keep: Optional[Callable[[Hashable], bool]] = None) -> Vec:
        """Coefficients ``y`` with ``sum y[tag] * column[tag] = vec``.

        ``keep`` may discard keys that are known to be irrelevant (for
        example, beyond a truncation degree) during the elimination.
        """
        v: Vec = {k: c for k, c in vec.items() if c and (keep is None or keep(k))}
        out: Vec = {}
        while v:
            lead = self._lead(v)
            hit = self.rows.get(lead)
            if hit is None:
                raise Inconsistent(f"vector not in the span: leading key {lead!r}")
            a = v[lead]
            axpy(out, a, hit[1])
            axpy(v, -a, hit[0])
            if keep is not None:
                for k in [k for k in v if not keep(k)]:
                    del v[k]
        return out
