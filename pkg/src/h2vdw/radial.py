"""Spectral Galerkin solver for the two-electron radial problems on the quadrant.

The 1D basis is ``b_j(r) = r L_j^(2)(2r) exp(-r)`` for ``j = 0..k``.  Every
matrix entry reduces to moments ``int r^m exp(-2r) dr = m!/2^(m+1)`` and is
assembled exactly before a single conversion to the working precision.

A 2D radial function is ``T(r1, r2) = sum_ij c_ij b_i(r1) b_j(r2)``.  The
channel operator ``-1/2 Laplacian + kappa_l1(r1) + kappa_l2(r2)`` with
``kappa_l(r) = l(l+1)/(2r^2) - 1/r + 1/2`` becomes the Sylvester equation
``A1 C G + G C A2 = F``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg
from scipy.special import eval_genlaguerre

from .arithmetic import Arithmetic, get_arithmetic
from .special_functions import exp_moment, laguerre_assoc

__all__ = [
    "RadialBasis",
    "RadialFunction",
    "SolveInfo",
    "CompatibilityError",
    "build_basis",
    "assemble_operator",
    "solve_bvp",
    "load_from_ground",
    "load_from_product",
    "t_moment",
    "inner",
    "inner_weighted",
    "ground_radial",
    "sample_grid",
    "sample_over_rr",
    "smallest_generalized_eigenvalue",
    "kappa",
]

COMPATIBILITY_TOL = 1e-8
RESIDUAL_TOL = 1e-10


def kappa(l: int, r):
    """Effective 1D potential ``l(l+1)/(2r^2) - 1/r + 1/2`` of channel degree ``l``."""
    return l * (l + 1) / (2 * r * r) - 1 / r + 0.5


class CompatibilityError(ArithmeticError):
    """Right-hand side of the (0,0) problem is not orthogonal to the ground direction."""


def _hankel(size: int, shift: int, start: int = 0) -> np.ndarray:
    """``H[s, t] = mu(s + t + shift)`` for powers ``start .. start+size-1``."""
    h = np.empty((size, size), dtype=object)
    for s in range(size):
        for t in range(size):
            h[s, t] = exp_moment(s + t + 2 * start + shift)
    return h


def _exact_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.dot(a, b)


class RadialBasis:
    """Exact 1D matrices for the family ``b_0..b_k`` plus working-precision copies.

    ``monomial(a)`` is ``int r^a b_p b_q dr``; ``a = -1`` is the Coulomb matrix
    and ``a = -2`` the centrifugal one.  ``load(l)`` is
    ``int r^(l+1) exp(-r) b_p dr``.
    """

    def __init__(self, degree: int, max_monomial: int, arith: Arithmetic | str = "extended"):
        if degree < 1:
            raise ValueError("degree must be >= 1")
        if max_monomial < 2:
            raise ValueError("max_monomial must be >= 2")
        self.degree = degree
        self.size = degree + 1
        self.max_monomial = max_monomial
        self.arith = get_arithmetic(arith)
        n = self.size
        # p_j(r) = r L_j^(2)(2r): coefficient of r^s in row j, s = 0..k+1
        P = np.zeros((n, n + 1), dtype=object)
        P[:] = Fraction(0)
        for j in range(n):
            for s, c in enumerate(laguerre_assoc(j, 2)):
                P[j, s + 1] = c * 2 ** s
        self.poly = P
        # derivative of b_j is (p_j' - p_j) exp(-r)
        Q = -P.copy()
        for s in range(1, n + 1):
            Q[:, s - 1] = Q[:, s - 1] + s * P[:, s]
        width = n + 1
        self._exact: dict[tuple[str, int], np.ndarray] = {}
        # p_j has no constant term, so r^-2 and r^-1 weights stay integrable
        Pr = P[:, 1:]
        for a in range(-2, max_monomial + 1):
            self._exact[("M", a)] = _exact_dot(_exact_dot(Pr, _hankel(n, a, start=1)), Pr.T)
        self._exact[("D", 0)] = _exact_dot(_exact_dot(Q, _hankel(width, 0)), Q.T)
        for l in range(0, max_monomial + 1):
            v = np.empty(n, dtype=object)
            for p in range(n):
                v[p] = sum((P[p, s] * exp_moment(s + l + 1) for s in range(width)), Fraction(0))
            self._exact[("v", l)] = v
        with self.arith.context():
            self._work = {key: self.arith.array(val) for key, val in self._exact.items()}
        self._lock = threading.Lock()
        self._eig: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    # exact matrices
    @property
    def gram_exact(self) -> np.ndarray:
        return self._exact[("M", 0)]

    @property
    def stiffness_exact(self) -> np.ndarray:
        return self._exact[("D", 0)]

    @property
    def coulomb_exact(self) -> np.ndarray:
        return self._exact[("M", -1)]

    @property
    def centrifugal_exact(self) -> np.ndarray:
        return self._exact[("M", -2)]

    def monomial_exact(self, a: int) -> np.ndarray:
        self._check_monomial(a)
        return self._exact[("M", a)]

    def load_exact(self, l: int) -> np.ndarray:
        self._check_monomial(l)
        return self._exact[("v", l)]

    def operator_1d_exact(self, l: int) -> np.ndarray:
        """``A(l) = D/2 + l(l+1) N/2 - C + G/2``, the Galerkin form of -d2/2 + kappa_l."""
        half = Fraction(1, 2)
        return (half * self.stiffness_exact + half * l * (l + 1) * self.centrifugal_exact
                - self.coulomb_exact + half * self.gram_exact)

    # working-precision matrices
    @property
    def gram(self) -> np.ndarray:
        return self._work[("M", 0)]

    def monomial(self, a: int) -> np.ndarray:
        self._check_monomial(a)
        return self._work[("M", a)]

    def load(self, l: int) -> np.ndarray:
        self._check_monomial(l)
        return self._work[("v", l)]

    def _check_monomial(self, a: int) -> None:
        if a > self.max_monomial or a < -2:
            raise ValueError(f"monomial degree {a} outside precomputed range [-2, {self.max_monomial}]")

    def eigen(self, l: int) -> tuple[np.ndarray, np.ndarray]:
        """Generalized eigenpairs of ``(A(l), G)``, cached per ``l``."""
        with self._lock:
            if l not in self._eig:
                self._eig[l] = self.arith.gen_eigh(self.operator_1d_exact(l), self.gram_exact)
            return self._eig[l]

    def zeros(self) -> np.ndarray:
        return self.arith.zeros((self.size, self.size))


def build_basis(k: int, max_monomial: int, arith: Arithmetic | str = "extended") -> RadialBasis:
    return RadialBasis(k, max_monomial, arith)


@dataclass
class RadialFunction:
    """Coefficient matrix of T over ``b_i(r1) b_j(r2)``."""

    coeffs: np.ndarray
    basis: RadialBasis

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        _same_basis(self, other)
        with self.basis.arith.context():
            return RadialFunction(self.coeffs + other.coeffs, self.basis)

    def scaled(self, factor) -> "RadialFunction":
        with self.basis.arith.context():
            return RadialFunction(self.coeffs * factor, self.basis)

    def transpose(self) -> "RadialFunction":
        return RadialFunction(self.coeffs.T.copy(), self.basis)

    def as_float(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)


def _same_basis(a: RadialFunction, b: RadialFunction) -> None:
    if a.basis is not b.basis:
        raise ValueError("radial functions live on different bases")


def ground_radial(basis: RadialBasis) -> RadialFunction:
    """``r1 r2 exp(-(r1+r2))``, which is exactly ``b_0 (x) b_0``."""
    c = basis.zeros()
    c[0, 0] = basis.arith.scalar(1)
    return RadialFunction(c, basis)


def assemble_operator(l1: int, l2: int, basis: RadialBasis, exact: bool = False) -> np.ndarray:
    """Dense Kronecker-sum matrix acting on row-major ``vec(C)``."""
    a1 = basis.operator_1d_exact(l1)
    a2 = basis.operator_1d_exact(l2)
    g = basis.gram_exact
    k = np.kron(a1, g) + np.kron(g, a2)
    if exact:
        return k
    with basis.arith.context():
        return basis.arith.array(k)


@dataclass(frozen=True)
class SolveInfo:
    residual: float
    compatibility: float | None = None


def _fnorm(x: np.ndarray) -> float:
    f = np.asarray(x, dtype=float)
    return float(np.sqrt(np.sum(f * f)))


def _operator_work(basis: RadialBasis, l: int) -> np.ndarray:
    key = ("A", l)
    with basis._lock:
        if key not in basis._work:
            basis._work[key] = basis.arith.array(basis.operator_1d_exact(l))
        return basis._work[key]


def apply_operator(l1: int, l2: int, c: np.ndarray, basis: RadialBasis) -> np.ndarray:
    """``A1 C G + G C A2`` in working precision."""
    with basis.arith.context():
        g = basis.gram
        return _operator_work(basis, l1) @ c @ g + g @ c @ _operator_work(basis, l2)


def compatibility_residual(load: np.ndarray) -> float:
    """Relative size of the load component along ``b_0 (x) b_0``."""
    norm = _fnorm(load)
    return abs(float(load[0, 0])) / norm if norm else 0.0


def solve_bvp(l1: int, l2: int, load: np.ndarray, basis: RadialBasis,
              method: str | None = None, check: bool = True) -> tuple[RadialFunction, SolveInfo]:
    """Galerkin solution of one channel problem.

    For ``(0, 0)`` the operator has the kernel ``b_0 (x) b_0``; the returned
    solution is G-orthogonal to it and the load must be compatible.
    ``method`` is ``"diagonal"`` (1D eigenbases) or ``"dense"`` (bordered
    Kronecker system); the default follows the backend.
    """
    arith = basis.arith
    if method is None:
        method = "dense" if arith.exact_solve else "diagonal"
    constrained = (l1, l2) == (0, 0)
    compat = None
    if constrained:
        compat = compatibility_residual(load)
        if check and compat > COMPATIBILITY_TOL:
            raise CompatibilityError(
                f"(0,0) load not orthogonal to ground direction: relative residual {compat:.3e}")
    with arith.context():
        if method == "diagonal":
            c = _solve_diagonal(l1, l2, load, basis, constrained)
        elif method == "dense":
            c = _solve_dense(l1, l2, load, basis, constrained)
        else:
            raise ValueError(f"unknown solve method {method!r}")
        resid_mat = apply_operator(l1, l2, c, basis) - load
        if constrained:
            resid_mat[0, 0] = arith.scalar(0)
    lnorm = _fnorm(load)
    residual = _fnorm(resid_mat) / lnorm if lnorm else _fnorm(resid_mat)
    if check and residual > RESIDUAL_TOL:
        raise ArithmeticError(f"({l1},{l2}) solve residual {residual:.3e} above tolerance")
    return RadialFunction(c, basis), SolveInfo(residual, compat)


def _solve_diagonal(l1, l2, load, basis, constrained):
    lam1, v1 = basis.eigen(l1)
    lam2, v2 = basis.eigen(l2)
    rhs = v1.T @ load @ v2
    n = basis.size
    x = basis.zeros()
    for i in range(n):
        for j in range(n):
            if constrained and i == 0 and j == 0:
                continue
            x[i, j] = rhs[i, j] / (lam1[i] + lam2[j])
    return v1 @ x @ v2.T


def _solve_dense(l1, l2, load, basis, constrained):
    arith = basis.arith
    n = basis.size
    f = load.reshape(n * n)
    if constrained:
        k_exact = assemble_operator(l1, l2, basis, exact=True)
        g0 = basis.gram_exact[0, 0] ** 2
        big = np.zeros((n * n + 1, n * n + 1), dtype=object)
        big[:] = Fraction(0)
        big[: n * n, : n * n] = k_exact
        big[0, n * n] = g0
        big[n * n, 0] = g0
        rhs = np.concatenate([f, np.array([arith.scalar(0)], dtype=object)])
        if arith.dtype is not object:
            rhs = rhs.astype(float)
        sol = arith.solve_exact(big, rhs)
        if sol is None:
            sol = arith.solve(arith.array(big), rhs)
        sol = sol[: n * n]
    else:
        k_exact = assemble_operator(l1, l2, basis, exact=True)
        sol = arith.solve_exact(k_exact, f)
        if sol is None:
            sol = arith.solve(arith.array(k_exact), f)
    return np.asarray(sol, dtype=arith.dtype).reshape(n, n)


def load_from_ground(a1: int, a2: int, basis: RadialBasis) -> np.ndarray:
    """Projection of ``r1^a1 r2^a2 exp(-(r1+r2))`` onto the tensor basis."""
    if a1 < 1 or a2 < 1:
        raise ValueError("monomial degrees must be >= 1")
    with basis.arith.context():
        return np.outer(basis.load(a1 - 1), basis.load(a2 - 1))


def load_from_product(prev: RadialFunction, a1: int, a2: int, weight=1) -> np.ndarray:
    """Projection of ``weight * r1^a1 r2^a2 T_prev``: ``w M(a1) C M(a2)^T``."""
    basis = prev.basis
    with basis.arith.context():
        out = basis.monomial(a1) @ prev.coeffs @ basis.monomial(a2)
        return out * weight


def t_moment(T: RadialFunction, l1: int, l2: int):
    """``int int r1^(l1+1) r2^(l2+1) exp(-(r1+r2)) T dr1 dr2``."""
    b = T.basis
    with b.arith.context():
        return b.load(l1) @ T.coeffs @ b.load(l2)


def inner_weighted(Ta: RadialFunction, Tb: RadialFunction, a1: int, a2: int):
    """``int int r1^a1 r2^a2 Ta Tb``."""
    _same_basis(Ta, Tb)
    b = Ta.basis
    with b.arith.context():
        return np.sum(Ta.coeffs * (b.monomial(a1) @ Tb.coeffs @ b.monomial(a2)))


def inner(Ta: RadialFunction, Tb: RadialFunction):
    return inner_weighted(Ta, Tb, 0, 0)


def _basis_values(basis: RadialBasis, r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return np.array([r * eval_genlaguerre(j, 2, 2 * r) * np.exp(-r) for j in range(basis.size)])


def sample_grid(T: RadialFunction, r1s, r2s) -> np.ndarray:
    """Values ``T(r1_i, r2_j)`` on the tensor grid."""
    b1 = _basis_values(T.basis, r1s)
    b2 = _basis_values(T.basis, r2s)
    return b1.T @ T.as_float() @ b2


def sample_over_rr(T: RadialFunction, r1s, r2s) -> np.ndarray:
    """``T / (r1 r2)``; the limit at zero radius is taken analytically."""
    r1s = np.asarray(r1s, dtype=float)
    r2s = np.asarray(r2s, dtype=float)

    def reduced(r):
        # b_j(r)/r = L_j^(2)(2r) exp(-r)
        return np.array([eval_genlaguerre(j, 2, 2 * r) * np.exp(-r) for j in range(T.basis.size)])

    return reduced(r1s).T @ T.as_float() @ reduced(r2s)


def smallest_generalized_eigenvalue(l1: int, l2: int, basis: RadialBasis, dense_check: bool = False) -> float:
    """Lowest eigenvalue of the channel operator against ``G (x) G``.

    It equals the sum of the two 1D minima; ``dense_check`` also solves the
    full Kronecker problem with LAPACK and returns the smaller of the two.
    """
    lo = float(basis.eigen(l1)[0][0]) + float(basis.eigen(l2)[0][0])
    if dense_check:
        k = np.asarray(assemble_operator(l1, l2, basis, exact=True), dtype=float)
        g = np.asarray(basis.gram_exact, dtype=float)
        dense = float(scipy.linalg.eigh(k, np.kron(g, g), eigvals_only=True)[0])
        lo = min(lo, dense)
    return lo
