"""Wigner 3j symbols from the Racah formula in exact integer arithmetic."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache


def _twice(x: float, name: str) -> int:
    two = 2 * Fraction(x).limit_denominator(4)
    if two.denominator != 1 or abs(float(two) - 2 * float(x)) > 1e-12:
        raise ValueError(f"{name}={x!r} is not an integer or half-integer")
    return int(two)


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Return the 3j symbol (j1 j2 j3; m1 m2 m3).

    Arguments may be integers or half-integers (as floats or Fractions).
    Symbols violating the triangle rule, m1 + m2 + m3 = 0, |m| <= j or the
    integer-sum conditions are zero.
    """
    args = [_twice(v, n) for v, n in zip((j1, j2, j3, m1, m2, m3), ("j1", "j2", "j3", "m1", "m2", "m3"))]
    return _wigner_3j_twice(*args)


@lru_cache(maxsize=65536)
def _wigner_3j_twice(tj1: int, tj2: int, tj3: int, tm1: int, tm2: int, tm3: int) -> float:
    if min(tj1, tj2, tj3) < 0:
        raise ValueError("angular momenta must be non-negative")
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tj3, tm3)):
        if abs(tm) > tj or (tj + tm) % 2:
            return 0.0
    if (tj1 + tj2 + tj3) % 2:
        return 0.0
    # triangle rule, in units of 1/2
    a, b, c = tj1 + tj2 - tj3, tj1 - tj2 + tj3, -tj1 + tj2 + tj3
    if min(a, b, c) < 0:
        return 0.0
    a, b, c = a // 2, b // 2, c // 2
    J = (tj1 + tj2 + tj3) // 2
    j1p, j1m = (tj1 + tm1) // 2, (tj1 - tm1) // 2
    j2p, j2m = (tj2 + tm2) // 2, (tj2 - tm2) // 2
    j3p, j3m = (tj3 + tm3) // 2, (tj3 - tm3) // 2

    f = math.factorial
    # terms of the Racah sum: t ranges over non-negative factorial arguments
    k1 = (tj3 - tj2 + tm1) // 2  # j3 - j2 + m1
    k2 = (tj3 - tj1 - tm2) // 2  # j3 - j1 - m2
    t_min = max(0, -k1, -k2)
    t_max = min(a, j1m, j2p)
    total = Fraction(0)
    for t in range(t_min, t_max + 1):
        den = f(t) * f(k1 + t) * f(k2 + t) * f(a - t) * f(j1m - t) * f(j2p - t)
        total += Fraction((-1) ** t, den)

    sq = Fraction(f(a) * f(b) * f(c), f(J + 1)) * (f(j1p) * f(j1m) * f(j2p) * f(j2m) * f(j3p) * f(j3m))
    phase = -1 if ((tj1 - tj2 - tm3) // 2) % 2 else 1
    return phase * float(total) * math.sqrt(sq)
