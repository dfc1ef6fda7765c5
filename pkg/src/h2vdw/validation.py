"""Invariant checks bundled for the ``validate`` command.

Each group returns a :class:`GroupResult`; ``tolerance_scale`` multiplies every
tolerance (0 forces failures, used to exercise the failure path).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from . import angular, perturbation, radial
from .angular import ChannelKey, Surd

__all__ = ["GroupResult", "REFERENCE_EXTRA_CHANNELS", "reference_channel_set", "run_all",
           "GROUPS"]


def _grid(l1s, l2s):
    return {ChannelKey(a, b) for a, b in product(l1s, l2s)}


# (l1, l2) pairs beyond B_n carried by phi_n, 6 <= n <= 9
REFERENCE_EXTRA_CHANNELS = {
    6: _grid((0, 2), (0, 2)),
    7: _grid((0, 2), (1, 3)) | _grid((1, 3), (0, 2)),
    8: _grid((0, 2), (0, 2, 4)) | _grid((1, 3), (1, 3)) | _grid((0, 2, 4), (0, 2)),
    9: (_grid((0, 2), (1, 3, 5)) | _grid((1, 3), (0, 2, 4)) | _grid((1, 3, 5), (0, 2))
        | _grid((0, 2, 4), (1, 3)) | _grid((1, 3), (1, 3))),
}


def reference_channel_set(n: int) -> set:
    return set(angular.b_set(n)) | REFERENCE_EXTRA_CHANNELS.get(n, set())


@dataclass
class GroupResult:
    name: str
    passed: bool
    details: list[str] = field(default_factory=list)


def _check(res: GroupResult, ok: bool, msg: str) -> None:
    if not ok:
        res.passed = False
        res.details.append(msg)


def angular_identities(rng, scale: float = 1.0) -> GroupResult:
    res = GroupResult("angular identities", True)
    tol = 1e-12 * scale
    for l1 in range(0, 6):
        for l2 in range(0, 6):
            for m in range(-min(l1, l2), min(l1, l2) + 1):
                _check(res, abs(angular.gc(l1, l2, m) - angular.gc(l1, l2, -m)) <= tol * abs(angular.gc(l1, l2, m)),
                       f"gc not even in m at {(l1, l2, m)}")
    for l, lp, lpp in product(range(5), repeat=3):
        if (l + lp + lpp) % 2:
            _check(res, not angular.zeta_surd(l, lp, lpp, 0, 0), f"zeta parity at {(l, lp, lpp)}")
    sets = angular.channel_sets(19)
    for n in range(6, 10):
        _check(res, set(sets[n]) == reference_channel_set(n), f"channel set mismatch at n={n}")
    for n in range(3, 20):
        _check(res, len(angular.b_set(n)) == n - 2, f"|B_n| wrong at n={n}")
    inv_pi = Surd(-1, Fraction(1), -2)
    for (l1, l2), expect in {(1, 1): Fraction(32, 3), (1, 2): Fraction(16),
                             (1, 3): Fraction(64, 3), (2, 2): Fraction(224, 5)}.items():
        mm = min(l1, l2)
        alphas = {m: inv_pi * angular.gc_surd(l1, l2, m) for m in range(-mm, mm + 1)}
        got = angular.beta_exact(alphas, l1, l2)
        _check(res, got == expect, f"beta{(l1, l2)} = {got}, expected {expect}")
    return res


def multipole_forms(rng, scale: float = 1.0) -> GroupResult:
    res = GroupResult("multipole forms", True)
    tol = 1e-10 * scale
    for n in range(3, 10):
        for _ in range(100):
            r1 = rng.normal(size=3)
            r2 = rng.normal(size=3)
            a = angular.evaluate_b_cartesian(n, r1, r2)
            b = angular.evaluate_b_spherical(n, r1, r2)
            ref = max(abs(a), 1e-300)
            _check(res, abs(a - b.real) <= tol * ref and abs(b.imag) <= tol * ref,
                   f"B^({n}) forms disagree: {a} vs {b}")
    for eps in (0.05, 0.02):
        K = 1.0 / (2.0 * eps)
        for n in range(3, 10):
            for _ in range(20):
                d1 = rng.normal(size=3)
                d2 = rng.normal(size=3)
                s1, s2 = rng.uniform(0.05, 1.0, size=2) * K / 2
                r1 = s1 * d1 / np.linalg.norm(d1)
                r2 = s2 * d2 / np.linalg.norm(d2)
                series = sum(eps ** k * angular.evaluate_b_cartesian(k, r1, r2) for k in range(3, n + 1))
                err = abs(angular.correlation_potential(eps, r1, r2) - series)
                _check(res, err <= 6 * K ** n * eps ** (n + 1) * scale,
                       f"truncation bound fails at n={n}, eps={eps}")
    return res


def operator_positivity(basis, scale: float = 1.0) -> GroupResult:
    res = GroupResult("operator positivity", True)
    floor = 3 / 8 - 1e-8 * scale
    for key in sorted(set().union(*angular.channel_sets(19).values())):
        if key == (0, 0):
            continue
        lo = radial.smallest_generalized_eigenvalue(key.l1, key.l2, basis)
        _check(res, lo >= floor, f"operator {tuple(key)} has eigenvalue {lo}")
    return res


def recursion_invariants(ws, scale: float = 1.0) -> GroupResult:
    res = GroupResult("normalization and structural zeros", True)
    tol = 1e-10 * scale
    hist = ws.history
    for n in range(1, len(hist)):
        lhs = float(perturbation.inner_wave(hist[0], hist[n]))
        rhs = -0.5 * sum(float(perturbation.inner_wave(hist[k], hist[n - k])) for k in range(1, n))
        _check(res, abs(lhs - rhs) <= tol * max(1.0, abs(rhs)), f"normalization chain fails at n={n}")
        if n >= 3:
            allowed = angular.channel_sets(n)[n]
            _check(res, hist[n].keys() <= allowed, f"phi_{n} leaves its channel set")
    for n in sorted(angular.STRUCTURAL_ZERO_ORDERS):
        if n < len(hist):
            val = float(ws.coefficients[n])
        elif n <= len(hist) + 2:
            val = float(perturbation.cn_direct(n, ws))
        else:
            val = float(perturbation.wigner_2n1((n - 1) // 2, ws)[1])
        _check(res, abs(val) <= tol, f"C_{n} = {val} is not zero")
    return res


GROUPS = ("angular identities", "multipole forms", "operator positivity",
          "normalization and structural zeros")


def run_all(seed: int = 0, degree: int = 11, precision: str = "extended",
            tolerance_scale: float = 1.0, n_max: int = 19) -> list[GroupResult]:
    rng = np.random.default_rng(seed)
    # depth 4 reaches C_9 through the (2n+1) rule
    ws = perturbation.build_history(n_max, degree, precision,
                                    depth=max(perturbation.history_depth(n_max), 4))
    return [
        angular_identities(rng, tolerance_scale),
        multipole_forms(rng, tolerance_scale),
        operator_positivity(ws.basis, tolerance_scale),
        recursion_invariants(ws, tolerance_scale),
    ]
