"""Parsing and formatting of exact rationals.

Rationals travel through JSON as strings ``"p/q"`` or plain integers.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Union

RationalLike = Union[int, str, Fraction]


def as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError(f"refusing float {value!r}; pass an exact rational string")
    raise TypeError(f"cannot interpret {value!r} as a rational")


def fmt(q: Fraction) -> Union[int, str]:
    """JSON form: integers stay integers, everything else becomes ``"p/q"``."""
    q = Fraction(q)
    if q.denominator == 1:
        return q.numerator
    return f"{q.numerator}/{q.denominator}"


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b) if a and b else 0


def common_denominator(values: Iterable[Fraction]) -> int:
    den = 1
    for v in values:
        den = lcm(den, Fraction(v).denominator)
    return den
