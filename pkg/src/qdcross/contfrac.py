"""Continued fractions for choosing almost-period subgroups q_k Z of rotations."""

from __future__ import annotations

import math
from fractions import Fraction

GOLDEN_THETA = (math.sqrt(5.0) - 1.0) / 2.0
SILVER_THETA = math.sqrt(2.0) - 1.0


def cf_terms(x: float | Fraction, count: int) -> list[int]:
    x = Fraction(x)
    terms = []
    for _ in range(count):
        a = math.floor(x)
        terms.append(a)
        frac = x - a
        if frac == 0:
            break
        x = 1 / frac
    return terms


def convergents(terms: list[int]) -> list[Fraction]:
    p0, p1 = 1, terms[0]
    q0, q1 = 0, 1
    out = [Fraction(p1, q1)]
    for a in terms[1:]:
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        out.append(Fraction(p1, q1))
    return out


def denominators(theta: float, count: int, minimum: int = 2) -> list[int]:
    """Distinct convergent denominators of ``theta`` that are >= ``minimum``."""
    out: list[int] = []
    terms = cf_terms(theta, 60)
    for c in convergents(terms):
        q = c.denominator
        if q >= minimum and q not in out:
            out.append(q)
        if len(out) == count:
            break
    return out


def circle_distance(q: int, theta: float) -> float:
    """|e^{2 pi i q theta} - 1|."""
    return abs(2.0 * math.sin(math.pi * q * theta))
