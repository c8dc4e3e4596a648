import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dwellcert.bounds import Verdict, chord_bound_check, lyapunov_bounds, quadratic_bound_gap, verdict_for
from dwellcert.errors import CertificateMismatch, ComplexLeading, DomainError, StepTooLarge
from dwellcert.pipeline import analyze
from dwellcert.polytope import PolytopeNorm, operator_norm
from dwellcert.system import validate_system


def test_gap_closed_form():
    assert quadratic_bound_gap(0.0, 1.0, 0.2) == 0.0
    assert quadratic_bound_gap(2.8361, 1.0, 0.2) == pytest.approx(-math.log(1 - 2.8361 * 0.04 / 8))
    assert quadratic_bound_gap(2.8361, 1.0, 0.2) == pytest.approx(0.01428, abs=5e-6)


@pytest.mark.parametrize("C, m", [(2.8361, 1.0), (14.0, 0.5), (0.3, 2.0)])
def test_gap_taylor_limit(C, m):
    for h in (0.01, 0.005, 0.001):
        assert quadratic_bound_gap(C, m, h) / h**2 == pytest.approx(C / (8 * m), rel=1e-2)


def test_gap_domain():
    with pytest.raises(DomainError):
        quadratic_bound_gap(200.0, 1.0, 0.2)
    with pytest.raises(DomainError):
        quadratic_bound_gap(-1.0, 1.0, 0.2)


def test_verdicts():
    assert verdict_for(0.1, 0.2) is Verdict.UNSTABLE
    assert verdict_for(-0.2, -0.1) is Verdict.STABLE
    assert verdict_for(-0.1, 0.1) is Verdict.INCONCLUSIVE
    assert verdict_for(0.0, 0.0) is Verdict.INCONCLUSIVE


def test_zero_regime_bounds():
    s = validate_system([np.zeros((2, 2))], 1.0)
    r = analyze(s, 0.5).report
    assert (r.sigma_lower, r.sigma_upper) == (0.0, 0.0)
    assert r.verdict is Verdict.INCONCLUSIVE


def test_example1_bounds(example1_analysis, example1):
    r = example1_analysis.report
    assert r.sigma_lower == pytest.approx(0.0325, abs=1e-3)
    assert r.sigma_upper == pytest.approx(0.0469, abs=1e-3)
    assert r.sigma_upper == pytest.approx(r.sigma_lower + quadratic_bound_gap(r.curvature, 1.0, 0.2), rel=1e-12)
    assert r.curvature == pytest.approx(2.8361, rel=0.25)
    assert r.sigma_lower <= r.sigma_upper
    assert r.verdict is Verdict.UNSTABLE


def test_mismatched_certificate(example1_analysis, example1):
    with pytest.raises(CertificateMismatch):
        lyapunov_bounds(example1_analysis.certificate, example1, 0.1)
    other = validate_system(example1.matrices, 2.0)
    with pytest.raises(CertificateMismatch):
        lyapunov_bounds(example1_analysis.certificate, other, 0.2)


def test_bound_unavailable_when_curvature_too_large():
    # a fast, stiff pair: the curvature is far beyond 8 / h^2 at h = m
    rng = np.random.default_rng(0)
    s = validate_system([6 * rng.standard_normal((2, 2)) for _ in range(2)], 1.0)
    a = analyze(s, 1.0)
    r = a.report
    assert r.certified
    assert r.curvature / 8 >= 1
    assert math.isinf(r.sigma_upper)
    assert r.verdict is Verdict.UNSTABLE


def test_chord_trivial_cases():
    P = PolytopeNorm(np.eye(2))
    x0 = np.array([0.3, -0.7])
    assert chord_bound_check(np.zeros((2, 2)), P, x0, 0.5, 0.2)
    for alpha in (-1.0, 0.5):
        assert chord_bound_check(alpha * np.eye(2), P, x0, 0.5, 0.25)


def test_chord_precondition():
    P = PolytopeNorm(np.eye(2))
    with pytest.raises(StepTooLarge):
        chord_bound_check(10 * np.eye(2), P, np.ones(2), 1.0, 0.5)
    with pytest.raises(ValueError):
        chord_bound_check(np.eye(2), P, np.ones(2), 0.5, 0.7)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.floats(0.05, 0.99), st.floats(0, 1))
def test_chord_inequality_holds(seed, d, frac, tfrac):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d))
    P = PolytopeNorm(rng.standard_normal((d + 3, d)))
    a2 = operator_norm(A @ A, P, P)
    h = frac * math.sqrt(8 / a2) if a2 > 0 else frac
    assert chord_bound_check(A, P, rng.standard_normal(d), h, tfrac * h)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 1000))
def test_bracket_is_ordered(seed):
    rng = np.random.default_rng(seed)
    s = validate_system([rng.standard_normal((2, 2)) for _ in range(2)], 1.0)
    try:
        r = analyze(s, 0.5).report
    except ComplexLeading:  # outside the supported case
        return
    if math.isfinite(r.sigma_upper):
        assert r.sigma_lower <= r.sigma_upper
