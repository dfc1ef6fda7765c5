import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import dblquad, quad
from scipy.special import eval_genlaguerre

from h2vdw import radial
from h2vdw.radial import (CompatibilityError, RadialFunction, assemble_operator, build_basis, ground_radial,
                          inner, inner_weighted, kappa, load_from_ground, load_from_product, sample_grid,
                          sample_over_rr, smallest_generalized_eigenvalue, solve_bvp, t_moment)
from h2vdw.special_functions import exp_moment

C6_REF = 6.49902670540
C8_REF = 124.399083


@pytest.fixture(scope="module")
def basis():
    return build_basis(11, 12, "extended")


@pytest.fixture(scope="module")
def dbasis():
    return build_basis(8, 8, "double")


def b(j, r):
    return r * eval_genlaguerre(j, 2, 2 * r) * np.exp(-r)


def db(j, r):
    # derivative of r L_j(2r) e^{-r}
    dl = -2 * eval_genlaguerre(j - 1, 3, 2 * r) if j > 0 else 0.0
    return (eval_genlaguerre(j, 2, 2 * r) + r * dl - r * eval_genlaguerre(j, 2, 2 * r)) * np.exp(-r)


def _q(f):
    return quad(f, 0, 80, limit=400, epsabs=1e-14, epsrel=1e-12)[0]


def test_gram_first_entry(basis):
    assert basis.gram_exact[0, 0] == Fraction(1, 4) == exp_moment(2)


def test_exact_matrices_are_rational_and_symmetric(basis):
    mats = [basis.gram_exact, basis.stiffness_exact, basis.coulomb_exact, basis.centrifugal_exact,
            basis.monomial_exact(3), basis.monomial_exact(12)]
    for m in mats:
        assert all(isinstance(x, Fraction) for x in m.ravel())
        assert (m == m.T).all()
    assert np.all(np.linalg.eigvalsh(np.asarray(basis.gram_exact, dtype=float)) > 0)


def test_gram_is_diagonal(basis):
    # r^2 e^{-2r} is the orthogonality weight of L_j^(2)(2r)
    g = basis.gram_exact
    for i in range(basis.size):
        for j in range(basis.size):
            if i != j:
                assert g[i, j] == 0
            else:
                assert g[i, i] == Fraction(math.factorial(i + 2), 8 * math.factorial(i))


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("p, q", [(0, 0), (1, 3), (4, 4), (2, 7)])
def test_matrices_against_quadrature(dbasis, p, q):
    assert float(dbasis.coulomb_exact[p, q]) == pytest.approx(_q(lambda r: b(p, r) * b(q, r) / r), rel=1e-10, abs=1e-12)
    assert float(dbasis.centrifugal_exact[p, q]) == pytest.approx(_q(lambda r: b(p, r) * b(q, r) / r ** 2), rel=1e-10, abs=1e-12)
    assert float(dbasis.stiffness_exact[p, q]) == pytest.approx(_q(lambda r: db(p, r) * db(q, r)), rel=1e-10, abs=1e-12)
    assert float(dbasis.monomial_exact(5)[p, q]) == pytest.approx(_q(lambda r: r ** 5 * b(p, r) * b(q, r)), rel=1e-10, abs=1e-10)
    assert float(dbasis.load_exact(3)[p]) == pytest.approx(_q(lambda r: r ** 4 * np.exp(-r) * b(p, r)), rel=1e-10, abs=1e-12)


def test_monomial_out_of_range(dbasis):
    with pytest.raises(ValueError):
        dbasis.monomial(9)


def test_kappa_values():
    assert kappa(0, 2) == 0
    assert kappa(1, 1) == 0.5


def test_l0_operator_has_exact_ground_kernel(basis):
    a0 = basis.operator_1d_exact(0)
    assert all(x == 0 for x in a0[0, :]) and all(x == 0 for x in a0[:, 0])


def test_assembled_operator_symmetric(basis):
    k = assemble_operator(1, 2, basis, exact=True)
    assert (k == k.T).all()


def test_positivity_floor(basis):
    for l1 in range(0, 9):
        for l2 in range(0, 9):
            if (l1, l2) == (0, 0):
                continue
            assert smallest_generalized_eigenvalue(l1, l2, basis, dense_check=True) >= 3 / 8 - 1e-8


def test_zero_load_gives_zero(basis):
    t, info = solve_bvp(1, 1, basis.zeros(), basis)
    assert all(x == 0 for x in t.coeffs.ravel())


def test_dipole_problem_moment(basis):
    t, info = solve_bvp(1, 1, load_from_ground(2, 2, basis), basis)
    assert info.residual < 1e-25
    assert float(t_moment(t, 1, 1)) == pytest.approx(C6_REF * 3 / 32, rel=1e-9)


def test_quadrupole_dipole_moment(basis):
    t, _ = solve_bvp(1, 2, load_from_ground(2, 3, basis), basis)
    assert float(t_moment(t, 1, 2)) == pytest.approx(C8_REF / 32, rel=1e-8)


def test_transposed_problems(basis):
    t12, _ = solve_bvp(1, 2, load_from_ground(2, 3, basis), basis)
    t21, _ = solve_bvp(2, 1, load_from_ground(3, 2, basis), basis)
    diff = np.asarray(t12.coeffs - t21.coeffs.T, dtype=float)
    assert np.max(np.abs(diff)) < 1e-25


def test_dense_and_diagonal_paths_agree(basis):
    load = load_from_ground(3, 2, basis)
    a, _ = solve_bvp(2, 1, load, basis, method="diagonal")
    d, _ = solve_bvp(2, 1, load, basis, method="dense")
    scale = np.max(np.abs(a.as_float()))
    assert np.max(np.abs(a.as_float() - d.as_float())) <= 1e-12 * scale


def test_double_mode_residual(dbasis):
    t, info = solve_bvp(2, 3, load_from_ground(3, 4, dbasis), dbasis)
    assert info.residual <= 1e-10


def _compatible_load(basis):
    # r1^2 r2^2 e^{-(r1+r2)} minus its ground component
    load = load_from_ground(2, 2, basis)
    g0 = basis.gram[0, 0] ** 2
    with basis.arith.context():
        load = load - ground_radial(basis).coeffs * (load[0, 0] / g0) * g0
    return load


def test_constrained_block(basis):
    load = _compatible_load(basis)
    for method in ("diagonal", "dense"):
        t, info = solve_bvp(0, 0, load, basis, method=method)
        ground = ground_radial(basis)
        overlap = abs(float(inner(ground, t)))
        norm = math.sqrt(float(inner(t, t)))
        assert overlap <= 1e-12 * norm
        assert info.compatibility <= 1e-25


def test_constrained_block_paths_agree(basis):
    load = _compatible_load(basis)
    a, _ = solve_bvp(0, 0, load, basis, method="diagonal")
    d, _ = solve_bvp(0, 0, load, basis, method="dense")
    assert np.max(np.abs(a.as_float() - d.as_float())) <= 1e-12 * np.max(np.abs(a.as_float()))


def test_incompatible_load_rejected(basis):
    with pytest.raises(CompatibilityError):
        solve_bvp(0, 0, load_from_ground(2, 2, basis), basis)


def test_load_from_ground_exact_entry(basis):
    load = load_from_ground(2, 2, basis)
    assert float(load[0, 0]) == pytest.approx(float(Fraction(3, 8) ** 2), rel=1e-30)
    assert np.linalg.matrix_rank(np.asarray(load, dtype=float)) == 1
    np.testing.assert_array_equal(load_from_ground(3, 2, basis), load_from_ground(2, 3, basis).T)


def test_load_from_ground_quadrature(dbasis):
    load = load_from_ground(3, 2, dbasis)
    for p, q in [(0, 0), (2, 1), (4, 3)]:
        f = lambda r2, r1: b(p, r1) * b(q, r2) * r1 ** 3 * r2 ** 2 * np.exp(-r1 - r2)
        ref = dblquad(f, 0, 60, 0, 60, epsabs=1e-13, epsrel=1e-11)[0]
        assert float(load[p, q]) == pytest.approx(ref, rel=1e-10, abs=1e-13)


def test_load_from_product(dbasis):
    rng = np.random.default_rng(2)
    prev = RadialFunction(rng.normal(size=(dbasis.size, dbasis.size)), dbasis)
    assert not np.any(load_from_product(prev, 2, 1, 0.0))
    np.testing.assert_allclose(load_from_product(prev, 0, 0), dbasis.gram @ prev.coeffs @ dbasis.gram, rtol=1e-14)
    small = RadialFunction(np.zeros((dbasis.size, dbasis.size)), dbasis)
    small.coeffs[1, 0], small.coeffs[0, 2] = 1.0, -0.5
    load = load_from_product(small, 2, 1, 1.0)

    def T(r1, r2):
        return b(1, r1) * b(0, r2) - 0.5 * b(0, r1) * b(2, r2)

    for p, q in [(0, 0), (1, 2), (3, 1)]:
        f = lambda r2, r1: r1 ** 2 * r2 * T(r1, r2) * b(p, r1) * b(q, r2)
        ref = dblquad(f, 0, 60, 0, 60, epsabs=1e-13, epsrel=1e-11)[0]
        assert load[p, q] == pytest.approx(ref, rel=1e-10, abs=1e-13)


def test_inner_products(basis):
    g = ground_radial(basis)
    assert float(inner(g, g)) == pytest.approx(float(exp_moment(2) ** 2), rel=1e-30)
    assert float(inner(g, g)) == pytest.approx(1 / 16, rel=1e-30)
    t, _ = solve_bvp(1, 1, load_from_ground(2, 2, basis), basis)
    assert float(inner(t, t)) > 0
    assert t_moment(RadialFunction(basis.zeros(), basis), 1, 1) == 0
    # against the ground direction the weighted inner product is the t-moment
    assert float(inner_weighted(t, g, 1, 1)) == pytest.approx(float(t_moment(t, 1, 1)), rel=1e-28)


def test_inner_basis_mismatch(basis, dbasis):
    with pytest.raises(ValueError):
        inner(ground_radial(basis), ground_radial(dbasis))


def test_sample_grid(basis):
    g = ground_radial(basis)
    assert sample_grid(g, [1.0], [1.0])[0, 0] == pytest.approx(math.exp(-2), rel=1e-14)
    t, _ = solve_bvp(2, 1, load_from_ground(3, 2, basis), basis)
    r = np.linspace(0, 20, 101)
    vals = sample_grid(t, r, r)
    assert not np.any(vals[0, :]) and not np.any(vals[:, 0])
    peak = np.max(np.abs(vals))
    for edge in (vals[-1, :], vals[:, -1]):
        assert np.max(np.abs(edge)) < 1e-4 * peak
    # the solution has a single positive bump in the bulk
    assert np.all(vals[5:60, 5:60] > 0)
    over = sample_over_rr(t, r[1:], r[1:])
    np.testing.assert_allclose(over * np.outer(r[1:], r[1:]), vals[1:, 1:], rtol=1e-10, atol=1e-14)


def test_galerkin_convergence():
    values = []
    for k in (4, 6, 8, 11):
        bk = build_basis(k, 4, "extended")
        t, _ = solve_bvp(1, 1, load_from_ground(2, 2, bk), bk)
        values.append(float(t_moment(t, 1, 1)))
    deltas = np.abs(np.diff(values))
    assert np.all(deltas[1:] < deltas[:-1])
    assert values[-1] == pytest.approx(C6_REF * 3 / 32, rel=1e-9)
