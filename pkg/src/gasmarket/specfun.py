"""Exponential integral on the negative real axis."""
from __future__ import annotations

import math

from .errors import DomainError

_EULER_GAMMA = 0.57721566490153286061
_EPS = 1e-17
_MAX_TERMS = 500


def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, _MAX_TERMS):
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < _EPS * abs(total):
            break
    return -_EULER_GAMMA - math.log(x) - total


def _e1_continued_fraction(x: float) -> float:
    # modified Lentz on E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    f = d
    for i in range(1, _MAX_TERMS):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return f * math.exp(-x)


def ei(z: float) -> float:
    """Ei(z) = -int_{-z}^inf e^{-t}/t dt for z < 0.

    Power series for |z| <= 1, continued fraction beyond; relative error
    is a few ulp across the range.
    """
    z = float(z)
    if not z < 0:
        raise DomainError(f"ei is implemented for z < 0 only, got {z}")
    x = -z
    if x > 745.0:
        return -0.0
    e1 = _e1_series(x) if x <= 1.0 else _e1_continued_fraction(x)
    return -e1
