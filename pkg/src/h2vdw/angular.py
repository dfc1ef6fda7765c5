"""Angular bookkeeping for the two-centre multipole problem.

Products of complex spherical harmonics are reduced with 3-j symbols. All
coefficients are carried as :class:`Surd` values ``sign * sqrt(q) * pi**(p/2)``
with rational ``q`` so that the powers of pi cancel exactly before rooting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import lpmv

from .special_functions import legendre_eval, wigner_3j_squared

__all__ = [
    "Surd",
    "ChannelKey",
    "Channel",
    "BTerm",
    "BOperator",
    "CouplingTerm",
    "STRUCTURAL_ZERO_ORDERS",
    "gc",
    "gc_surd",
    "gr",
    "b_set",
    "build_b_operator",
    "zeta",
    "zeta_surd",
    "channel_sets",
    "couple",
    "beta",
    "beta_exact",
    "sph_harm",
    "evaluate_b_cartesian",
    "evaluate_b_spherical",
    "correlation_potential",
]

# Orders n for which C_n vanishes identically (C_1..C_5 from the absence of
# eps, eps^2 terms in the potential, C_7 and C_9 by channel parity).
STRUCTURAL_ZERO_ORDERS = frozenset({1, 2, 3, 4, 5, 7, 9})


@dataclass(frozen=True)
class Surd:
    """``sign * sqrt(square) * pi ** (pi_half / 2)`` with rational ``square``."""

    sign: int
    square: Fraction
    pi_half: int = 0

    def __mul__(self, other: "Surd") -> "Surd":
        if self.sign == 0 or other.sign == 0:
            return ZERO_SURD
        return Surd(self.sign * other.sign, self.square * other.square,
                    self.pi_half + other.pi_half)

    def __neg__(self) -> "Surd":
        return Surd(-self.sign, self.square, self.pi_half)

    def __bool__(self) -> bool:
        return self.sign != 0

    def rational(self) -> Fraction | None:
        """Exact value when it is rational (pi-free perfect square), else None."""
        if self.sign == 0:
            return Fraction(0)
        if self.pi_half != 0:
            return None
        num = math.isqrt(self.square.numerator)
        den = math.isqrt(self.square.denominator)
        if num * num != self.square.numerator or den * den != self.square.denominator:
            return None
        return self.sign * Fraction(num, den)

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.sqrt(self.square) * math.pi ** (self.pi_half / 2)

    def evaluate(self, arith):
        """Value in the working precision of ``arith`` (see :mod:`h2vdw.arithmetic`)."""
        if self.sign == 0:
            return arith.scalar(0)
        val = arith.sqrt(arith.scalar(self.square))
        if self.pi_half:
            val = val * arith.sqrt(arith.pi()) ** self.pi_half
        return val if self.sign > 0 else -val


ZERO_SURD = Surd(0, Fraction(0), 0)


class ChannelKey(NamedTuple):
    l1: int
    l2: int


class Channel(NamedTuple):
    """Angular sector Y_{l1}^{m} (electron 1) times Y_{l2}^{-m} (electron 2)."""

    l1: int
    l2: int
    m: int

    @property
    def key(self) -> ChannelKey:
        return ChannelKey(self.l1, self.l2)


class BTerm(NamedTuple):
    a1: int
    a2: int
    m: int
    coefficient: Surd


@dataclass(frozen=True)
class BOperator:
    order: int
    terms: tuple[BTerm, ...]


class CouplingTerm(NamedTuple):
    out: Channel
    weight: Surd
    monomial: tuple[int, int]


@lru_cache(maxsize=None)
def gc_surd(l1: int, l2: int, m: int) -> Surd:
    if abs(m) > min(l1, l2):
        raise ValueError(f"|m|={abs(m)} exceeds min(l1, l2) for ({l1}, {l2})")
    f = math.factorial
    square = Fraction(
        16 * f(l1 + l2) ** 2,
        (2 * l1 + 1) * (2 * l2 + 1) * f(l1 - m) * f(l1 + m) * f(l2 - m) * f(l2 + m),
    )
    return Surd((-1) ** l2, square, 2)


def gc(l1: int, l2: int, m: int) -> float:
    """Coupling coefficient of r1^l1 r2^l2 Y_l1^m Y_l2^-m in the multipole expansion."""
    return float(gc_surd(l1, l2, m))


def gr(l1: int, l2: int, m: int) -> float:
    """Real-harmonic counterpart (-1)^m G_c, kept for documentation parity."""
    return (-1) ** m * gc(l1, l2, m)


def b_set(n: int) -> list[ChannelKey]:
    if n < 3:
        raise ValueError(f"multipole order must be >= 3, got {n}")
    return [ChannelKey(l, n - 1 - l) for l in range(1, n - 1)]


@lru_cache(maxsize=None)
def build_b_operator(n: int) -> BOperator:
    terms = []
    for a1, a2 in b_set(n):
        mm = min(a1, a2)
        for m in range(-mm, mm + 1):
            terms.append(BTerm(a1, a2, m, gc_surd(a1, a2, m)))
    return BOperator(n, tuple(terms))


@lru_cache(maxsize=None)
def zeta_surd(l: int, lp: int, lpp: int, m: int, mp: int) -> Surd:
    if (l + lp + lpp) % 2:
        return ZERO_SURD
    s0, q0 = wigner_3j_squared(l, lp, lpp, 0, 0, 0)
    s1, q1 = wigner_3j_squared(l, lp, lpp, m, mp, -m - mp)
    if s0 == 0 or s1 == 0:
        return ZERO_SURD
    square = Fraction((2 * l + 1) * (2 * lp + 1) * (2 * lpp + 1), 4) * q0 * q1
    return Surd((-1) ** ((m + mp) % 2) * s0 * s1, square, -1)


def zeta(l: int, lp: int, lpp: int, m: int, mp: int) -> float:
    """Coefficient of Y_lpp^(m+mp) in the product Y_l^m Y_lp^mp."""
    return float(zeta_surd(l, lp, lpp, m, mp))


def _m_set(l1: int, l2: int, ll1: int, ll2: int) -> tuple[range, range]:
    return (range(abs(l1 - ll1), l1 + ll1 + 1, 2), range(abs(l2 - ll2), l2 + ll2 + 1, 2))


def _reachable(bk: list[ChannelKey], source: set[ChannelKey]) -> set[ChannelKey]:
    out = set()
    for a1, a2 in bk:
        for l1, l2 in source:
            r1, r2 = _m_set(a1, a2, l1, l2)
            out.update(ChannelKey(x, y) for x in r1 for y in r2)
    return out


@lru_cache(maxsize=None)
def _channel_sets_upto(n_max: int) -> tuple[tuple[int, frozenset], ...]:
    sets: dict[int, set[ChannelKey]] = {3: set(b_set(3))}
    for n in range(4, n_max + 1):
        cur = set(b_set(n))
        for k in range(3, n - 2):
            cur |= _reachable(b_set(k), sets[n - k])
        for k in range(3, n - 5):
            if (n - k) not in STRUCTURAL_ZERO_ORDERS:
                cur |= sets[k]
        if n % 2 == 0 and n >= 6:
            # normalisation term <phi_0, phi_n> is generically nonzero
            cur.add(ChannelKey(0, 0))
        sets[n] = cur
    return tuple((n, frozenset(s)) for n, s in sorted(sets.items()))


def channel_sets(n_max: int) -> dict[int, frozenset[ChannelKey]]:
    """The sets of (l1, l2) pairs that may carry a nonzero radial part in phi_n."""
    if n_max < 3:
        raise ValueError("n_max must be >= 3")
    return dict(_channel_sets_upto(n_max))


@lru_cache(maxsize=None)
def _couple_cached(a1: int, a2: int, mu: int, src: Channel) -> tuple[tuple[Channel, Surd], ...]:
    l1, l2, m = src
    m_out = m + mu
    out = []
    r1, r2 = _m_set(a1, a2, l1, l2)
    for L1 in r1:
        for L2 in r2:
            if abs(m_out) > min(L1, L2):
                continue
            w = zeta_surd(a1, l1, L1, mu, m) * zeta_surd(a2, l2, L2, -mu, -m)
            if w:
                out.append((Channel(L1, L2, m_out), w))
    return tuple(out)


def couple(b_term: BTerm, src: Channel) -> list[CouplingTerm]:
    """Expand one multipole term acting on one wavefunction channel."""
    a1, a2, mu, coeff = b_term
    return [
        CouplingTerm(ch, coeff * w, (a1, a2))
        for ch, w in _couple_cached(a1, a2, mu, Channel(*src))
    ]


def beta(alphas: dict[int, float], l1: int, l2: int) -> float:
    return -sum(alphas.get(m, 0.0) * gc(l1, l2, m) for m in alphas) / math.pi


def beta_exact(alphas: dict[int, Surd], l1: int, l2: int) -> Fraction | None:
    """Rational value of ``beta`` when every term is rational, else None."""
    inv_pi = Surd(-1, Fraction(1), -2)
    total = Fraction(0)
    for m, a in alphas.items():
        term = (inv_pi * a * gc_surd(l1, l2, m)).rational()
        if term is None:
            return None
        total += term
    return total


def sph_harm(l: int, m: int, theta, phi):
    """Complex spherical harmonic with the Condon-Shortley phase."""
    am = abs(m)
    norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - am) / math.factorial(l + am))
    y = norm * lpmv(am, l, np.cos(theta)) * np.exp(1j * am * np.asarray(phi))
    if m < 0:
        y = (-1) ** am * np.conj(y)
    return y


def _spherical(v):
    v = np.asarray(v, dtype=float)
    r = float(np.linalg.norm(v))
    if r == 0.0:
        raise ValueError("zero vector has no direction")
    return r, math.acos(max(-1.0, min(1.0, v[2] / r))), math.atan2(v[1], v[0])


def _solid_legendre(l: int, v) -> float:
    # |v|^l P_l(v_z/|v|); a homogeneous polynomial, so 0 at the origin for l >= 1
    r = float(np.linalg.norm(v))
    if r == 0.0:
        return 1.0 if l == 0 else 0.0
    return r ** l * legendre_eval(l, v[2] / r)


def evaluate_b_cartesian(n: int, r1vec, r2vec) -> float:
    """Multipole operator of order n via its Legendre-difference form (axis e = z)."""
    r1vec = np.asarray(r1vec, dtype=float)
    r2vec = np.asarray(r2vec, dtype=float)
    if not np.any(r1vec) or not np.any(r2vec):
        raise ValueError("electron positions must be nonzero vectors")
    l = n - 1
    return (_solid_legendre(l, r1vec - r2vec) - _solid_legendre(l, r1vec)
            - _solid_legendre(l, -r2vec))


def evaluate_b_spherical(n: int, r1vec, r2vec) -> complex:
    """Same operator from the spherical-harmonic expansion."""
    r1, t1, p1 = _spherical(r1vec)
    r2, t2, p2 = _spherical(r2vec)
    total = 0j
    for a1, a2, m, c in build_b_operator(n).terms:
        total += (float(c) * r1 ** a1 * r2 ** a2
                  * sph_harm(a1, m, t1, p1) * sph_harm(a2, -m, t2, p2))
    return complex(total)


def correlation_potential(eps: float, r1vec, r2vec) -> float:
    """Full correlation potential V_eps of two atoms separated by 1/eps along z."""
    e = np.array([0.0, 0.0, 1.0])
    R = 1.0 / eps
    r1vec = np.asarray(r1vec, dtype=float)
    r2vec = np.asarray(r2vec, dtype=float)
    return (-1.0 / np.linalg.norm(r1vec - R * e) - 1.0 / np.linalg.norm(r2vec + R * e)
            + 1.0 / np.linalg.norm(r1vec - r2vec - R * e) + eps)
