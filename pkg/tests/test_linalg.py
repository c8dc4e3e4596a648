import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dwellcert.errors import ComplexLeading, NonFiniteEntry, NotSquare
from dwellcert.linalg import leading_eigenpair, mat_exp, operator_2norm, spectral_radius

from conftest import example1_matrices


def taylor_expm(A, t=1.0, terms=30, squarings=20):
    """Scaled Taylor series, squared back up: an oracle independent of scipy.

    Runs in extended precision because the squarings amplify rounding by
    about ``2**squarings``.
    """
    B = np.asarray(A, dtype=np.longdouble) * np.longdouble(t) / np.longdouble(2) ** squarings
    E = np.eye(len(B), dtype=np.longdouble)
    term = np.eye(len(B), dtype=np.longdouble)
    for k in range(1, terms + 1):
        term = term @ B / k
        E = E + term
    for _ in range(squarings):
        E = E @ E
    return E.astype(float)


def power_iteration(M, steps=10_000):
    x = np.ones(len(M))
    lam = 0.0
    for _ in range(steps):
        y = M @ x
        lam = (x @ y) / (x @ x)
        x = y / np.linalg.norm(y)
    return lam, x


small_mats = st.integers(1, 5).flatmap(
    lambda d: arrays(np.float64, (d, d), elements=st.floats(-3, 3, allow_nan=False))
)


def test_exp_at_zero_is_identity():
    A = np.arange(9.0).reshape(3, 3)
    np.testing.assert_array_equal(mat_exp(A, 0.0), np.eye(3))


def test_exp_diagonal():
    np.testing.assert_allclose(mat_exp(np.diag([1.0, 2.0]), 1.0), np.diag([math.e, math.e**2]), rtol=1e-14)


@pytest.mark.parametrize("which", [0, 1])
def test_exp_matches_taylor_oracle_on_example1(which):
    A = example1_matrices()[which]
    E = mat_exp(A, 0.2)
    ref = taylor_expm(A, 0.2)
    mask = np.abs(ref) > 1e-300
    assert np.all(np.abs(E[mask] - ref[mask]) <= 1e-12 * np.abs(ref[mask]))
    assert np.all(E[~mask] == 0)


def test_exp_rejects_bad_input():
    with pytest.raises(NotSquare):
        mat_exp(np.ones((2, 3)))
    with pytest.raises(NonFiniteEntry):
        mat_exp(np.array([[np.nan]]))


@settings(max_examples=60, deadline=None)
@given(small_mats, st.floats(0, 1), st.floats(0, 1))
def test_exp_semigroup(A, s, t):
    lhs = mat_exp(A, s) @ mat_exp(A, t)
    rhs = mat_exp(A, s + t)
    assert np.linalg.norm(lhs - rhs, 2) <= 1e-9 * np.linalg.norm(rhs, 2)


def test_spectral_radius_trivial():
    assert spectral_radius(np.eye(2)) == pytest.approx(1.0)
    assert spectral_radius(np.array([[0.0, 1.0], [0.0, 0.0]])) == pytest.approx(0.0, abs=1e-12)
    assert spectral_radius(np.array([[2.0, 1.0], [1.0, 2.0]])) == pytest.approx(3.0)


@settings(max_examples=80, deadline=None)
@given(small_mats)
def test_spectral_radius_below_2norm(M):
    assert spectral_radius(M) <= operator_2norm(M) * (1 + 1e-12) + 1e-12


@settings(max_examples=60, deadline=None)
@given(small_mats, st.integers(1, 5))
def test_spectral_radius_of_powers(M, k):
    r = spectral_radius(M)
    rk = spectral_radius(np.linalg.matrix_power(M, k))
    assert rk == pytest.approx(r**k, rel=1e-7, abs=1e-9 * max(1.0, operator_2norm(M)) ** k)


def test_operator_2norm_trivial():
    assert operator_2norm(np.eye(3)) == pytest.approx(1.0)
    assert operator_2norm(np.diag([2.0, -5.0])) == pytest.approx(5.0)
    assert operator_2norm(np.array([[0.0, 3.0], [0.0, 0.0]])) == pytest.approx(3.0)


def test_leading_eigenpair_diagonal():
    ep = leading_eigenpair(np.diag([3.0, 1.0]))
    assert ep.value == pytest.approx(3.0)
    np.testing.assert_allclose(ep.vector, [1.0, 0.0], atol=1e-12)


def test_leading_eigenpair_rejects_sign_tie():
    with pytest.raises(ComplexLeading):
        leading_eigenpair(np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_leading_eigenpair_rejects_rotation():
    with pytest.raises(ComplexLeading):
        leading_eigenpair(np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_leading_eigenpair_nonnegative_matrix_gives_nonnegative_vector():
    rng = np.random.default_rng(3)
    for _ in range(20):
        M = rng.random((5, 5))
        ep = leading_eigenpair(M)
        assert np.all(ep.vector >= 0)


def test_leading_eigenpair_matches_power_iteration(example1_analysis):
    cycle = example1_analysis.certificate.leading_cycle
    M = cycle.path.matrix
    ep = leading_eigenpair(M)
    lam, x = power_iteration(M)
    assert ep.value == pytest.approx(lam, rel=1e-9)
    assert abs(abs(ep.vector @ x) - 1) < 1e-8
    # the leading eigenvalue of this product is negative
    assert abs(ep.value) == pytest.approx(spectral_radius(M), rel=1e-12)
    # the stored product is normalised; its scale lives in log_scale
    log_rho = math.log(abs(ep.value)) + cycle.path.log_scale
    assert math.exp(log_rho / cycle.path.total_time) == pytest.approx(cycle.value, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(small_mats)
def test_eigenpair_residual(M):
    try:
        ep = leading_eigenpair(M)
    except ComplexLeading:
        return
    assert np.linalg.norm(ep.vector) == pytest.approx(1.0)
    assert np.linalg.norm(M @ ep.vector - ep.value * ep.vector) <= 1e-8 * max(operator_2norm(M), 1e-300)
