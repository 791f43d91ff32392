"""Exact rational scalars.

All coefficients are ``gmpy2.mpq`` values. They behave like
``fractions.Fraction`` but multiply and add considerably faster, which
matters for the large sparse tensors built by the quantization code.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from gmpy2 import mpq

__all__ = ["Q", "ZERO", "ONE", "as_q", "q_str", "parse_q"]

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)

Number = Union[int, Fraction, "mpq", str]


def as_q(x: Number) -> mpq:
    """Coerce an int, Fraction, mpq or ``"p/q"`` string to ``mpq``."""
    if isinstance(x, str):
        return parse_q(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted")
    return mpq(x)


def q_str(x: mpq) -> str:
    """Canonical string: ``"p/q"`` in lowest terms, or ``"p"`` for integers."""
    x = mpq(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_q(s: str) -> mpq:
    s = s.strip()
    if not s:
        raise ValueError("empty rational literal")
    if "/" in s:
        num, den = s.split("/", 1)
        d = int(den)
        if d == 0:
            raise ValueError(f"zero denominator in {s!r}")
        return mpq(int(num), d)
    return mpq(int(s))
