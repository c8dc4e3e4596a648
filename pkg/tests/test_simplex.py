import numpy as np
import pytest
from scipy.optimize import linprog

from dwellcert import _simplex_py, lp

try:
    from dwellcert import _simplex_ext
except ImportError:
    _simplex_ext = None

BACKENDS = [pytest.param(_simplex_py.solve, id="python")]
BACKENDS.append(
    pytest.param(
        getattr(_simplex_ext, "solve", None),
        id="compiled",
        marks=pytest.mark.skipif(_simplex_ext is None, reason="extension not built"),
    )
)


def highs(A, b, c):
    res = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    return res.status, res.fun


def symmetric_lp(rng, d, k):
    V = rng.standard_normal((d, k))
    return np.hstack([V, -V]), rng.standard_normal(d), np.ones(2 * k)


def positive_lp(rng, d, k):
    V = np.abs(rng.standard_normal((d, k)))
    A = np.hstack([V, -np.eye(d)])
    return A, np.abs(rng.standard_normal(d)), np.concatenate([np.ones(k), np.zeros(d)])


@pytest.mark.parametrize("solve", BACKENDS)
@pytest.mark.parametrize("shape", [symmetric_lp, positive_lp])
def test_matches_highs_on_random_lps(solve, shape):
    rng = np.random.default_rng(11)
    for trial in range(60):
        d = int(rng.integers(1, 7))
        k = int(rng.integers(1, 40))
        A, b, c = shape(rng, d, k)
        ref_status, ref_obj = highs(A, b, c)
        status, obj, x, _ = solve(A, b, c)
        if ref_status == 2:
            assert status == lp.INFEASIBLE, trial
            continue
        assert status == lp.OPTIMAL, trial
        assert obj == pytest.approx(ref_obj, rel=1e-8, abs=1e-9)
        assert np.all(x >= -1e-12)
        np.testing.assert_allclose(A @ x, b, atol=1e-8)


@pytest.mark.parametrize("solve", BACKENDS)
def test_general_lps_match_highs(solve):
    rng = np.random.default_rng(5)
    for _ in range(60):
        m, k = int(rng.integers(1, 6)), int(rng.integers(2, 15))
        A = rng.standard_normal((m, k))
        x0 = np.abs(rng.standard_normal(k))
        b = A @ x0
        c = np.abs(rng.standard_normal(k)) + 0.1
        ref_status, ref_obj = highs(A, b, c)
        assert ref_status == 0
        status, obj, _, _ = solve(A, b, c)
        assert status == lp.OPTIMAL
        assert obj == pytest.approx(ref_obj, rel=1e-8, abs=1e-9)


@pytest.mark.parametrize("solve", BACKENDS)
def test_infeasible(solve):
    A = np.array([[1.0, 1.0]])
    status, obj, _, _ = solve(A, np.array([-1.0]), np.ones(2))
    assert status == lp.INFEASIBLE
    assert obj == np.inf


@pytest.mark.parametrize("solve", BACKENDS)
def test_unbounded(solve):
    A = np.array([[1.0, -1.0]])
    status, _, _, _ = solve(A, np.array([1.0]), np.array([0.0, -1.0]))
    assert status == lp.UNBOUNDED


@pytest.mark.parametrize("solve", BACKENDS)
def test_degenerate_cross_polytope(solve):
    # many duplicated columns force degenerate pivots
    V = np.tile(np.eye(3), 20)
    A = np.hstack([V, -V])
    status, obj, _, _ = solve(A, np.array([1.0, -2.0, 0.5]), np.ones(A.shape[1]))
    assert status == lp.OPTIMAL
    assert obj == pytest.approx(3.5)


@pytest.mark.skipif(_simplex_ext is None, reason="extension not built")
def test_backends_agree_exactly_on_objective():
    rng = np.random.default_rng(2)
    for _ in range(40):
        A, b, c = symmetric_lp(rng, 4, 100)
        r_py = _simplex_py.solve(A, b, c)
        r_cy = _simplex_ext.solve(A, b, c)
        assert r_py[0] == r_cy[0]
        assert r_py[1] == pytest.approx(r_cy[1], rel=1e-10)


def test_backend_is_reported():
    assert lp.BACKEND in ("python", "cython")
