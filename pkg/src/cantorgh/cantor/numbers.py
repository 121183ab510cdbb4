"""Mixed exact / high-precision arithmetic for log-domain scale values.

Values are :class:`fractions.Fraction` when exact and ``mpf`` numbers from a
private 100-bit mpmath context otherwise.  mpmath refuses ``Fraction``
operands, so every mixed operation goes through :func:`mp`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

import mpmath

MP = mpmath.MPContext()
MP.prec = 100

Value = Union[Fraction, "mpmath.mpf"]


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def mp(x):
    """Convert ``x`` to an ``mpf`` of the private context."""
    if isinstance(x, Fraction):
        return MP.mpf(x.numerator) / x.denominator
    if isinstance(x, (int, float, str)):
        return MP.mpf(x)
    return MP.mpf(x)


def exact_or_mp(x):
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    return x


def add(a, b):
    if is_exact(a) and is_exact(b):
        return Fraction(a) + Fraction(b)
    return mp(a) + mp(b)


def sub(a, b):
    if is_exact(a) and is_exact(b):
        return Fraction(a) - Fraction(b)
    return mp(a) - mp(b)


def mul(a, b):
    if is_exact(a) and is_exact(b):
        return Fraction(a) * Fraction(b)
    return mp(a) * mp(b)


def div(a, b):
    if is_exact(a) and is_exact(b):
        return Fraction(a) / Fraction(b)
    return mp(a) / mp(b)


def lt(a, b) -> bool:
    if is_exact(a) and is_exact(b):
        return Fraction(a) < Fraction(b)
    return bool(mp(a) < mp(b))


def le(a, b) -> bool:
    if is_exact(a) and is_exact(b):
        return Fraction(a) <= Fraction(b)
    return bool(mp(a) <= mp(b))


def to_float(x) -> float:
    if isinstance(x, Fraction):
        try:
            return float(x)
        except OverflowError:
            return float("inf") if x > 0 else float("-inf")
    return float(x)


def log2_exact(x: Fraction) -> Fraction | None:
    """``log2(x)`` when ``x`` is an integer power of two, else ``None``."""
    x = Fraction(x)
    if x <= 0:
        return None
    num, den = x.numerator, x.denominator
    if num & (num - 1) or den & (den - 1):
        return None
    return Fraction(num.bit_length() - den.bit_length())


def log2(x):
    """Exact for powers of two, otherwise a 100-bit ``mpf``."""
    if is_exact(x):
        e = log2_exact(Fraction(x))
        if e is not None:
            return e
    return MP.log(mp(x), 2)


def pow2_neg_le(e: Fraction, r: Fraction) -> bool:
    """Exact test of ``2**(-e) <= r`` for rational ``e`` and positive rational ``r``."""
    e, r = Fraction(e), Fraction(r)
    if r <= 0:
        return False
    if e >= 0 and r >= 1:
        return True
    a, b = e.numerator, e.denominator
    p, q = r.numerator, r.denominator
    # bit-length shortcuts keep giant exponents from being materialized
    if a >= b * q.bit_length():
        return True
    if -a >= b * p.bit_length():
        return False
    if b == 1:
        return q <= p << a if a >= 0 else q << -a <= p
    lhs, rhs = q ** b, p ** b
    return lhs <= rhs << a if a >= 0 else lhs << -a <= rhs


def fmt(x, digits: int = 17) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return MP.nstr(x, digits)
