"""Exact combinatorics, orthogonal polynomials, moment integrals and 3-j symbols.

Everything that feeds matrix assembly is returned as :class:`fractions.Fraction`
so that round-off only enters when a caller explicitly converts to floats.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "factorial",
    "exp_moment",
    "laguerre_assoc",
    "poly_mul",
    "poly_eval",
    "legendre_eval",
    "wigner_3j",
    "wigner_3j_squared",
]


def factorial(n: int) -> Fraction:
    if n < 0:
        raise ValueError(f"factorial of negative number {n}")
    return Fraction(math.factorial(n))


@lru_cache(maxsize=None)
def exp_moment(m: int) -> Fraction:
    """Return the exact value of the integral of ``r**m * exp(-2 r)`` over (0, inf)."""
    if m < 0:
        raise ValueError(f"moment order must be nonnegative, got {m}")
    return Fraction(math.factorial(m), 2 ** (m + 1))


def laguerre_assoc(n: int, m: int) -> tuple[Fraction, ...]:
    """Monomial coefficients of the associated Laguerre polynomial L_n^(m).

    ``L_n^(m)(x) = sum_k binom(n+m, n-k) (-x)^k / k!``, index = power of x.
    """
    if n < 0 or m < 0:
        raise ValueError("degree and superscript must be nonnegative")
    return tuple(
        Fraction((-1) ** k * math.comb(n + m, n - k), math.factorial(k))
        for k in range(n + 1)
    )


def poly_mul(p, q) -> tuple[Fraction, ...]:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return tuple(out)


def poly_eval(p, x):
    acc = 0 * x
    for c in reversed(p):
        acc = acc * x + c
    return acc


def legendre_eval(k: int, x: float) -> float:
    """Legendre polynomial P_k(x) by the Bonnet three-term recurrence."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    p_prev, p = 1.0, x
    if k == 0:
        return p_prev
    for j in range(1, k):
        p_prev, p = p, ((2 * j + 1) * x * p - j * p_prev) / (j + 1)
    return p


def _triangle_ok(a: int, b: int, c: int) -> bool:
    return abs(a - b) <= c <= a + b


@lru_cache(maxsize=None)
def wigner_3j_squared(l1: int, l2: int, l3: int, m1: int, m2: int, m3: int) -> tuple[int, Fraction]:
    """Return ``(sign, square)`` with ``3j = sign * sqrt(square)`` exactly.

    Uses the Racah single-sum formula; ``sign`` is 0 for vanishing symbols.
    """
    if m1 + m2 + m3 != 0 or not _triangle_ok(l1, l2, l3):
        return 0, Fraction(0)
    if abs(m1) > l1 or abs(m2) > l2 or abs(m3) > l3:
        return 0, Fraction(0)
    if m1 == m2 == m3 == 0 and (l1 + l2 + l3) % 2:
        return 0, Fraction(0)
    f = math.factorial
    delta = Fraction(
        f(l1 + l2 - l3) * f(l1 - l2 + l3) * f(-l1 + l2 + l3), f(l1 + l2 + l3 + 1)
    )
    pref = delta * (
        f(l1 + m1) * f(l1 - m1) * f(l2 + m2) * f(l2 - m2) * f(l3 + m3) * f(l3 - m3)
    )
    t_min = max(0, l2 - l3 - m1, l1 - l3 + m2)
    t_max = min(l1 + l2 - l3, l1 - m1, l2 + m2)
    s = Fraction(0)
    for t in range(t_min, t_max + 1):
        s += Fraction(
            (-1) ** t,
            f(t) * f(l3 - l2 + t + m1) * f(l3 - l1 + t - m2)
            * f(l1 + l2 - l3 - t) * f(l1 - t - m1) * f(l2 - t + m2),
        )
    if s == 0:
        return 0, Fraction(0)
    sign = (-1) ** ((l1 - l2 - m3) % 2) * (1 if s > 0 else -1)
    return sign, pref * s * s


def wigner_3j(l1: int, l2: int, l3: int, m1: int, m2: int, m3: int) -> float:
    sign, sq = wigner_3j_squared(l1, l2, l3, m1, m2, m3)
    if sign == 0:
        return 0.0
    return sign * math.sqrt(sq)
