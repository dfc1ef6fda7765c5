"""Working-precision backends.

Matrices are assembled exactly (``Fraction``) and converted once to the working
type.  Three modes are available:

``double``
    numpy float64 with LAPACK solves.
``extended``
    numpy object arrays of ``gmpy2.mpfr`` (113-bit significand by default).
``rational-solve``
    as ``extended``, but every linear solve is carried out in exact rational
    arithmetic (python-flint) on the exactly converted right-hand side.
"""
from __future__ import annotations

import contextlib
import math
from fractions import Fraction

import gmpy2
import mpmath
import numpy as np
import scipy.linalg

__all__ = ["Arithmetic", "DoubleArithmetic", "ExtendedArithmetic",
           "RationalSolveArithmetic", "get_arithmetic", "PRECISIONS"]

PRECISIONS = ("double", "extended", "rational-solve")


class Arithmetic:
    name: str = ""
    dtype = None
    eps: float = 0.0
    exact_solve = False

    def context(self):
        return contextlib.nullcontext()

    def scalar(self, x):
        raise NotImplementedError

    def array(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=object)
        out = np.empty(values.shape, dtype=self.dtype)
        for idx, v in np.ndenumerate(values):
            out[idx] = self.scalar(v)
        return out

    def zeros(self, shape) -> np.ndarray:
        return self.array(np.zeros(shape, dtype=object))

    def sqrt(self, x):
        raise NotImplementedError

    def pi(self):
        raise NotImplementedError

    def to_float(self, x) -> float:
        return float(x)

    def gen_eigh(self, a: np.ndarray, g: np.ndarray):
        """Solve ``a v = lam g v`` for exact symmetric ``a`` and SPD ``g``.

        Returns eigenvalues (ascending) and G-orthonormal eigenvectors as columns.
        """
        raise NotImplementedError

    def solve(self, matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def solve_exact(self, matrix_exact: np.ndarray, rhs: np.ndarray) -> np.ndarray | None:
        """Exact solve hook; None means the backend does not solve exactly."""
        return None


class DoubleArithmetic(Arithmetic):
    name = "double"
    dtype = np.float64
    eps = float(np.finfo(float).eps)

    def scalar(self, x):
        return float(x)

    def zeros(self, shape):
        return np.zeros(shape)

    def sqrt(self, x):
        return math.sqrt(x)

    def pi(self):
        return math.pi

    def gen_eigh(self, a, g):
        return scipy.linalg.eigh(self.array(a), self.array(g))

    def solve(self, matrix, rhs):
        return scipy.linalg.solve(matrix, rhs, assume_a="sym")


def _mpf_to_mpfr(x):
    sign, man, exp, _ = x._mpf_
    if not man:
        return gmpy2.mpfr(0)
    val = gmpy2.mul_2exp(gmpy2.mpfr(man), exp)
    return -val if sign else val


def _fraction_to_mpf(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


class ExtendedArithmetic(Arithmetic):
    name = "extended"
    dtype = object

    def __init__(self, precision_bits: int = 113):
        self.precision_bits = precision_bits
        self.eps = 2.0 ** (1 - precision_bits)

    def context(self):
        return gmpy2.context(gmpy2.get_context(), precision=self.precision_bits)

    def scalar(self, x):
        with self.context():
            if isinstance(x, Fraction):
                return gmpy2.mpfr(gmpy2.mpq(x.numerator, x.denominator))
            return gmpy2.mpfr(x)

    def sqrt(self, x):
        with self.context():
            return gmpy2.sqrt(x)

    def pi(self):
        with self.context():
            return gmpy2.const_pi()

    def gen_eigh(self, a, g):
        # mpmath with guard bits, rounded to mpfr afterwards
        n = a.shape[0]
        with mpmath.workprec(self.precision_bits + 40):
            A = mpmath.matrix([[_fraction_to_mpf(x) for x in row] for row in a])
            G = mpmath.matrix([[_fraction_to_mpf(x) for x in row] for row in g])
            L = mpmath.cholesky(G)
            Li = mpmath.inverse(L)
            S = Li * A * Li.T
            S = (S + S.T) / 2
            lam, Q = mpmath.eigsy(S)
            V = Li.T * Q
            order = sorted(range(n), key=lambda i: lam[i])
            with self.context():
                lam_out = np.array([_mpf_to_mpfr(lam[i]) for i in order], dtype=object)
                v_out = np.empty((n, n), dtype=object)
                for c, i in enumerate(order):
                    for r in range(n):
                        v_out[r, c] = _mpf_to_mpfr(V[r, i])
        return lam_out, v_out

    def solve(self, matrix, rhs):
        """Gaussian elimination with partial pivoting on object arrays."""
        with self.context():
            a = np.array(matrix, dtype=object, copy=True)
            b = np.array(rhs, dtype=object, copy=True)
            n = a.shape[0]
            for col in range(n):
                piv = col + int(np.argmax([abs(a[r, col]) for r in range(col, n)]))
                if a[piv, col] == 0:
                    raise np.linalg.LinAlgError("singular matrix")
                if piv != col:
                    a[[col, piv]] = a[[piv, col]]
                    b[[col, piv]] = b[[piv, col]]
                factors = a[col + 1:, col] / a[col, col]
                a[col + 1:, col:] -= np.outer(factors, a[col, col:])
                b[col + 1:] -= factors * b[col]
            x = np.empty(n, dtype=object)
            for r in range(n - 1, -1, -1):
                x[r] = (b[r] - np.dot(a[r, r + 1:], x[r + 1:])) / a[r, r]
            return x


class RationalSolveArithmetic(ExtendedArithmetic):
    name = "rational-solve"
    exact_solve = True

    def solve_exact(self, matrix_exact, rhs):
        try:
            import flint
        except ImportError as exc:  # pragma: no cover - optional dependency
            raise RuntimeError("precision 'rational-solve' needs python-flint") from exc
        n = matrix_exact.shape[0]
        m = flint.fmpq_mat(n, n, [flint.fmpq(x.numerator, x.denominator)
                                  for x in matrix_exact.ravel()])
        b = flint.fmpq_mat(n, 1, [flint.fmpq(*map(int, v.as_integer_ratio())) for v in rhs])
        x = m.solve(b)
        with self.context():
            return np.array([gmpy2.mpfr(gmpy2.mpq(int(x[i, 0].p), int(x[i, 0].q)))
                             for i in range(n)], dtype=object)


def get_arithmetic(precision: str | Arithmetic = "extended") -> Arithmetic:
    if isinstance(precision, Arithmetic):
        return precision
    if precision == "double":
        return DoubleArithmetic()
    if precision == "extended":
        return ExtendedArithmetic()
    if precision == "rational-solve":
        return RationalSolveArithmetic()
    raise ValueError(f"unknown precision {precision!r}; expected one of {PRECISIONS}")
