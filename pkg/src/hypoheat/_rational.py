"""Exact-or-float scalar helpers shared by the symbolic and numeric layers."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Union

Number = Union[Fraction, float]


def as_number(value) -> Number:
    """Coerce to a Fraction when the input is exact, otherwise to float.

    Strings are parsed as rationals ("5/2", "-1", "0.1").
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return float(value)
    # numpy scalars and friends
    f = float(value)
    if f.is_integer():
        return Fraction(int(f))
    return f


def as_fraction(value) -> Fraction:
    """Coerce to an exact Fraction; floats are converted by their binary value."""
    v = as_number(value)
    return v if isinstance(v, Fraction) else Fraction(v)


def is_exact(value) -> bool:
    return isinstance(value, (Fraction, int)) and not isinstance(value, bool)


def fmt_number(value):
    """JSON-friendly rendering: exact values as "p/q" strings, floats untouched."""
    if isinstance(value, Rational) and not isinstance(value, bool):
        num, den = int(value.numerator), int(value.denominator)
        return str(num) if den == 1 else f"{num}/{den}"
    return float(value)
