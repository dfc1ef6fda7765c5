"""Rayleigh-Schroedinger recursion for the two-atom dispersion series.

The eigenvalue expands as ``lambda_eps = -1 - sum_n C_n eps^n`` and each
correction ``phi_n`` is stored channel by channel:

    phi_n = sum_c T_c(r1, r2) / (r1 r2) * Y_l1^m(1) Y_l2^-m(2)

so that inner products reduce to plain radial integrals of the ``T_c``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .angular import (STRUCTURAL_ZERO_ORDERS, Channel, Surd, build_b_operator,
                      channel_sets, couple, gc_surd)
from .arithmetic import Arithmetic
from .radial import (RadialBasis, RadialFunction, build_basis, ground_radial,
                     solve_bvp, t_moment)

__all__ = [
    "WaveOrder",
    "CoefficientEntry",
    "CoefficientTable",
    "Workspace",
    "ground_state",
    "cn_direct",
    "step",
    "inner_wave",
    "inner_with_b",
    "wigner_2n1",
    "run",
    "history_depth",
    "build_history",
    "closed_forms",
]

GROUND = Channel(0, 0, 0)
LEAK_TOL = 1e-10


@dataclass
class WaveOrder:
    order: int
    channels: dict[Channel, RadialFunction]
    c_n: object = 0

    def keys(self) -> set:
        return {ch.key for ch in self.channels}


@dataclass
class CoefficientEntry:
    n: int
    value: float
    method: str
    degree: int
    cross_check_delta: float | None = None


@dataclass
class CoefficientTable:
    entries: dict[int, CoefficientEntry] = field(default_factory=dict)
    compatibility_residuals: dict[int, float] = field(default_factory=dict)
    solver_residuals: dict[int, float] = field(default_factory=dict)

    def value(self, n: int) -> float:
        return self.entries[n].value

    def __iter__(self):
        return iter(self.entries[n] for n in sorted(self.entries))


class Workspace:
    """Basis, history and caches shared by one recursion run."""

    def __init__(self, basis: RadialBasis):
        self.basis = basis
        self.arith: Arithmetic = basis.arith
        self.history: list[WaveOrder] = []
        self.coefficients: dict[int, object] = {0: self.arith.scalar(1)}
        self._surd: dict[Surd, object] = {}
        self._product: dict[tuple[int, Channel, int, int], np.ndarray] = {}
        self.compatibility: dict[int, float] = {}
        self.residuals: dict[int, float] = {}

    def surd(self, s: Surd):
        val = self._surd.get(s)
        if val is None:
            val = self._surd[s] = s.evaluate(self.arith)
        return val

    def product(self, order: int, src: Channel, a1: int, a2: int) -> np.ndarray:
        """``M(a1) T M(a2)^T`` for one stored channel, memoised."""
        key = (order, src, a1, a2)
        out = self._product.get(key)
        if out is None:
            t = self.history[order].channels[src].coeffs
            b = self.basis
            out = self._product[key] = b.monomial(a1) @ t @ b.monomial(a2).T
        return out

    def coefficient(self, k: int):
        return self.coefficients.get(k, 0)

    def phi(self, n: int) -> WaveOrder:
        if n >= len(self.history):
            raise ValueError(f"phi_{n} not in history (have {len(self.history)} orders)")
        return self.history[n]


def ground_state(basis: RadialBasis) -> WaveOrder:
    """``pi^-1 exp(-(r1+r2))``: radial part ``4 r1 r2 exp(-(r1+r2))`` on Y_0^0 Y_0^0."""
    g = ground_radial(basis).scaled(basis.arith.scalar(4))
    return WaveOrder(0, {GROUND: g}, basis.arith.scalar(1))


def _new_workspace(basis: RadialBasis) -> Workspace:
    ws = Workspace(basis)
    with ws.arith.context():
        ws.history.append(ground_state(basis))
    return ws


def inner_wave(a: WaveOrder, b: WaveOrder):
    """``<phi_a, phi_b>``; channels are orthonormal so only equal channels pair."""
    total = 0
    for ch in sorted(set(a.channels) & set(b.channels)):
        ta = a.channels[ch]
        tb = b.channels[ch]
        if ta.basis is not tb.basis:
            raise ValueError("orders built on different bases")
        with ta.basis.arith.context():
            total = total + np.sum(ta.coeffs * (ta.basis.gram @ tb.coeffs @ ta.basis.gram))
    return total


def _inner_b(ws: Workspace, i: int, k: int, j: int):
    """``<phi_i, B^(k) phi_j>`` using the workspace product cache."""
    if k < 3:
        return 0
    a = ws.phi(i)
    b = ws.phi(j)
    if not a.channels or not b.channels:
        return 0
    op = build_b_operator(k)
    total = 0
    for src in sorted(b.channels):
        by_monomial: dict[tuple[int, int], object] = {}
        for term in op.terms:
            for ct in couple(term, src):
                ta = a.channels.get(ct.out)
                if ta is None:
                    continue
                acc = ta.coeffs * ws.surd(ct.weight)
                key = ct.monomial
                by_monomial[key] = acc if key not in by_monomial else by_monomial[key] + acc
        for (a1, a2), w in sorted(by_monomial.items()):
            total = total + np.sum(w * ws.product(j, src, a1, a2))
    return total


def inner_with_b(a: WaveOrder, k: int, b: WaveOrder):
    """``<phi_a, B^(k) phi_b>`` for two standalone orders."""
    if k < 3 or not a.channels or not b.channels:
        return 0
    basis = next(iter(b.channels.values())).basis
    ws = Workspace(basis)
    ws.history = [a, b]
    with ws.arith.context():
        return _inner_b(ws, 0, k, 1)


def cn_direct(n: int, ws: Workspace):
    """``C_n`` from projecting the order-n equation on ``phi_0``."""
    if n < 6:
        return ws.arith.scalar(0)
    if len(ws.history) < n - 2:
        raise ValueError(f"C_{n} needs phi_0..phi_{n - 3}")
    with ws.arith.context():
        total = ws.arith.scalar(0)
        for k in range(3, n - 2):
            total = total - _inner_b(ws, 0, k, n - k)
        for k in range(6, n - 2):
            ck = ws.coefficient(k)
            if ck:
                total = total - ck * inner_wave(ws.phi(0), ws.phi(n - k))
        return total


def step(n: int, ws: Workspace, solve_method: str | None = None) -> WaveOrder:
    """Append ``phi_n`` to the history; ``C_n`` is fixed first so (0,0) is solvable."""
    if len(ws.history) != n:
        raise ValueError(f"history must hold phi_0..phi_{n - 1}")
    arith = ws.arith
    allowed = channel_sets(max(n, 3)).get(n, frozenset())
    with arith.context():
        c_n = cn_direct(n, ws)
        ws.coefficients[n] = c_n
        loads: dict[Channel, np.ndarray] = {}

        def add(ch, val):
            loads[ch] = val if ch not in loads else loads[ch] + val

        for k in range(3, n + 1):
            prev = ws.phi(n - k)
            if not prev.channels:
                continue
            op = build_b_operator(k)
            for src in sorted(prev.channels):
                for term in op.terms:
                    for ct in couple(term, src):
                        p = ws.product(n - k, src, *ct.monomial)
                        add(ct.out, -ws.surd(ct.weight) * p)
        g = ws.basis.gram
        for k in range(1, n + 1):
            ck = ws.coefficient(k)
            if not ck:
                continue
            for ch, t in sorted(ws.phi(n - k).channels.items()):
                add(ch, -ck * (g @ t.coeffs @ g))

        norms = {ch: _fnorm(v) for ch, v in loads.items()}
        scale = max(norms.values(), default=0.0)
        channels: dict[Channel, RadialFunction] = {}
        worst = 0.0
        for ch in sorted(loads):
            if ch.key not in allowed:
                if norms[ch] > LEAK_TOL * max(scale, 1.0):
                    raise ArithmeticError(f"order {n}: channel {tuple(ch)} outside the admissible set received load")
                continue
            try:
                t, info = solve_bvp(ch.l1, ch.l2, loads[ch], ws.basis, method=solve_method)
            except ArithmeticError as exc:
                raise ArithmeticError(f"order {n}, channel {tuple(ch)}: {exc}") from exc
            if info.compatibility is not None:
                ws.compatibility[n] = info.compatibility
            worst = max(worst, info.residual)
            channels[ch] = t
        ws.residuals[n] = worst

        # normalisation: <phi_0, phi_n> = -1/2 sum_{k=1}^{n-1} <phi_k, phi_{n-k}>
        wave = WaveOrder(n, channels, c_n)
        target = arith.scalar(0)
        for k in range(1, n):
            target = target - inner_wave(ws.phi(k), ws.phi(n - k)) / 2
        if target:
            ground = ws.phi(0).channels[GROUND].scaled(target)
            channels[GROUND] = channels[GROUND] + ground if GROUND in channels else ground
    ws.history.append(wave)
    return wave


def _fnorm(x) -> float:
    f = np.asarray(x, dtype=float)
    return float(np.sqrt(np.sum(f * f)))


def _c_mix(ws: Workspace, i: int, m: int):
    """``<phi_i, sum_{j=0}^m C_j phi_{m-j}>`` with ``C_0 = 1``."""
    total = 0
    for j in range(0, m + 1):
        cj = ws.coefficient(j)
        if cj and m - j < len(ws.history):
            total = total + cj * inner_wave(ws.phi(i), ws.phi(m - j))
    return total


def _b_mix(ws: Workspace, i: int, total_order: int, jmax: int):
    """``<phi_i, sum_{j=0}^{jmax} B^(total_order - i - j) phi_j>``."""
    acc = 0
    for j in range(0, jmax + 1):
        acc = acc + _inner_b(ws, i, total_order - i - j, j)
    return acc


def wigner_2n1(n: int, ws: Workspace):
    """``(C_2n, C_2n+1)`` from ``phi_0..phi_n`` by Wigner's (2n+1) rule."""
    if len(ws.history) < n + 1:
        raise ValueError(f"Wigner rule at n={n} needs phi_0..phi_{n}")
    with ws.arith.context():
        def overlap(k):
            return sum((inner_wave(ws.phi(i), ws.phi(n + k - i)) for i in range(k, n + 1)), 0)

        even = _c_mix(ws, n, n)
        for i in range(0, n):
            even = even - _b_mix(ws, i, 2 * n, n)
        for k in range(1, n + 1):
            ov = overlap(k)
            if ov:
                even = even - ov * sum((_c_mix(ws, i, n - k - i) for i in range(0, n - k + 1)), 0)

        odd = 0
        for i in range(0, n + 1):
            odd = odd - _b_mix(ws, i, 2 * n + 1, n)
        for k in range(1, n + 1):
            ov = overlap(k)
            if ov:
                odd = odd - ov * sum((_c_mix(ws, i, n + 1 - k - i) for i in range(0, n + 2 - k)), 0)
    return even, odd


def history_depth(n_max: int) -> int:
    """Highest wave order needed for ``C_n_max`` through the (2n+1) rule."""
    return max(3, math.ceil((n_max - 1) / 2))


def build_history(n_max: int, degree: int, arith: Arithmetic | str = "extended",
                  depth: int | None = None, solve_method: str | None = None) -> Workspace:
    depth = history_depth(n_max) if depth is None else depth
    basis = build_basis(degree, max(2 * n_max, 4), arith)
    ws = _new_workspace(basis)
    for n in range(1, depth + 1):
        step(n, ws, solve_method)
    return ws


def run(n_max: int = 19, degree: int = 11, mode: Arithmetic | str = "extended",
        depth: int | None = None, workspace: Workspace | None = None) -> CoefficientTable:
    """Coefficient table ``C_1..C_n_max``.

    Orders up to the history depth ``h`` carry the direct value; higher ones use
    the (2n+1) rule.  Where both are available the relative difference is kept
    as ``cross_check_delta``.
    """
    if n_max < 6 or n_max > 19:
        raise ValueError("n_max must lie in [6, 19]")
    ws = workspace or build_history(n_max, degree, mode, depth)
    h = len(ws.history) - 1
    direct: dict[int, object] = {}
    for n in range(1, n_max + 1):
        if n <= h:
            direct[n] = ws.coefficients[n]
        elif n <= h + 3:
            direct[n] = cn_direct(n, ws)
    wigner: dict[int, object] = {}
    for m in range(3, h + 1):
        if 2 * m > n_max and 2 * m - 1 > n_max:
            break
        even, odd = wigner_2n1(m, ws)
        wigner[2 * m] = even
        wigner[2 * m + 1] = odd
    table = CoefficientTable(compatibility_residuals=dict(ws.compatibility),
                             solver_residuals=dict(ws.residuals))
    for n in range(1, n_max + 1):
        d = direct.get(n)
        w = wigner.get(n)
        if n in STRUCTURAL_ZERO_ORDERS:
            val = d if d is not None else w
            val = 0.0 if val is None else float(val)
            table.entries[n] = CoefficientEntry(n, val, "structural_zero", degree)
            continue
        if n <= h:
            value, method = d, "direct"
        else:
            value, method = w, "wigner_2n1"
        delta = None
        if d is not None and w is not None and 6 <= n:
            with ws.arith.context():
                delta = float(abs(d - w) / abs(value))
        table.entries[n] = CoefficientEntry(n, float(value), method, degree, delta)
    return table


def closed_forms(ws: Workspace) -> dict[int, float]:
    """C_6, C_8, C_10 from t-moments of phi_3..phi_5."""
    def t(order, l1, l2):
        # alpha = -G_c/pi is folded into T; undo it on the m = 0 component
        alpha = ws.surd(Surd(-1, Fraction(1), -2) * gc_surd(l1, l2, 0))
        return t_moment(ws.phi(order).channels[Channel(l1, l2, 0)], l1, l2) / alpha

    def c(x):
        return ws.arith.scalar(x)

    out = {}
    with ws.arith.context():
        out[6] = ws.arith.to_float(c(Fraction(32, 3)) * t(3, 1, 1))
        if len(ws.history) > 4:
            out[8] = ws.arith.to_float(c(32) * t(4, 1, 2))
        if len(ws.history) > 5:
            out[10] = ws.arith.to_float(c(Fraction(128, 3)) * t(5, 1, 3) + c(Fraction(224, 5)) * t(5, 2, 2))
    return out
