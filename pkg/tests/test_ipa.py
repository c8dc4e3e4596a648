import dataclasses
import math

import numpy as np
import pytest

from dwellcert.cycles import DwellNotation, cycle_from_notation, enumerate_cycles, find_leading_cycle, make_cycle
from dwellcert.ipa import IpaConfig, Status, run_ipa, verify_certificate
from dwellcert.linalg import leading_eigenpair
from dwellcert.polytope import PolytopeNorm, check_extremality, contains, norm_eval
from dwellcert.system import build_discretization, validate_system


def test_identity_dynamics_certify_at_once():
    g = build_discretization(validate_system([np.zeros((2, 2))], 0.8), 0.4)
    cert = run_ipa(g, make_cycle(g, [0]))
    assert cert.status is Status.CERTIFIED
    # one round absorbs the seed, one more absorbs the completing direction
    assert cert.iterations_used == 2
    assert cert.rho_hat == pytest.approx(1.0)
    assert cert.epsilon == 0.0
    np.testing.assert_allclose(np.abs(cert.multinorm[0].vertices), np.eye(2))


def test_flat_polytope_is_completed_to_a_norm():
    # a Jordan block has no extremal norm; the result must still be a norm
    J = np.array([[1.0, 1.0], [0.0, 1.0]])
    g = build_discretization(validate_system([J], 1.0), 0.5)
    cert = run_ipa(g, make_cycle(g, [0]), IpaConfig(max_iterations=20))
    assert cert.multinorm[0].spans
    assert cert.status is Status.APPROXIMATE and cert.epsilon > 0
    assert verify_certificate(g, cert)


def test_example1_certificate(example1_analysis):
    cert = example1_analysis.certificate
    assert cert.status is Status.CERTIFIED
    assert cert.rho_hat == pytest.approx(1.0331, abs=1e-3)
    assert cert.rho_hat >= cert.leading_cycle.value
    gs = example1_analysis.graph.shifted(math.log(cert.rho_hat))
    assert check_extremality(gs, cert.multinorm, 1.0) <= cert.epsilon + 1e-9
    v = verify_certificate(example1_analysis.graph, cert)
    assert v and v.max_excess <= 1e-8


def test_example1_named_containments(example1_analysis):
    # e^{m(A_1 - s)} P_2 in P_1, e^{h(A_1 - s)} P_1 in P_1, and the same for mode 2
    cert = example1_analysis.certificate
    gs = example1_analysis.graph.shifted(math.log(cert.rho_hat))
    P = cert.multinorm
    for e in gs.edges:
        worst = max(norm_eval(P[e.target], e.operator @ v) for v in P[e.source].vertices)
        assert worst <= 1 + 1e-8


def test_tampered_rho_fails(example1_analysis):
    cert = example1_analysis.certificate
    g = example1_analysis.graph
    halved = dataclasses.replace(cert, rho_hat=cert.rho_hat / 2)
    v = verify_certificate(g, halved)
    assert not v and v.violations
    raised = dataclasses.replace(cert, rho_hat=cert.rho_hat * 1.1)
    assert not verify_certificate(g, raised)


def test_shrunk_polytope_fails(example1_analysis):
    cert = example1_analysis.certificate
    comps = list(cert.multinorm)
    V = np.array(comps[1].vertices)
    V[0] *= 1.1
    comps[1] = PolytopeNorm(V, comps[1].variant)
    bad = dataclasses.replace(cert, multinorm=type(cert.multinorm)(tuple(comps)))
    assert not verify_certificate(example1_analysis.graph, bad)


def test_seed_trajectory_is_periodic(example1_analysis):
    cert = example1_analysis.certificate
    gs = example1_analysis.graph.shifted(math.log(cert.rho_hat))
    x0 = leading_eigenpair(cert.leading_cycle.path.matrix).vector
    x = x0.copy()
    for idx in cert.leading_cycle.edges:
        x = gs.edges[idx].operator @ x
    # the shifted cycle maps x0 to +-x0
    assert min(np.linalg.norm(x - x0), np.linalg.norm(x + x0)) <= 1e-9


def test_balls_grow_monotonically(example1):
    g = build_discretization(example1, 0.2)
    cycle = find_leading_cycle(g)
    early = run_ipa(g, cycle, IpaConfig(max_iterations=3))
    late = run_ipa(g, cycle, IpaConfig(max_iterations=6))
    assert early.status is Status.APPROXIMATE
    for P, Q in zip(early.multinorm, late.multinorm):
        for v in P.vertices:
            assert contains(Q, v, 1e-9)


def random_metzler(rng, n, d):
    mats = []
    for _ in range(n):
        A = rng.integers(-9, 10, (d, d)).astype(float)
        off = ~np.eye(d, dtype=bool)
        A[off] = np.abs(A[off])
        mats.append(A / np.linalg.norm(A, 2))
    return mats


@pytest.mark.parametrize("seed", range(3))
def test_positive_mode_vertices_stay_in_orthant(seed):
    rng = np.random.default_rng(seed)
    s = validate_system(random_metzler(rng, 2, 3), 0.5)
    g = build_discretization(s, 0.25)
    cycle = find_leading_cycle(g, enum_length=8, beam=40, depth=200, wide_beam=100, wide_depth=40)
    cert = run_ipa(g, cycle, IpaConfig(max_iterations=25, positive_mode=True))
    for P in cert.multinorm:
        assert P.positive
        assert np.all(np.asarray(P.vertices) >= -1e-12)
    assert verify_certificate(g, cert)


def test_mode_permutation_invariance(example1):
    g = build_discretization(example1, 0.2)
    cert = run_ipa(g, find_leading_cycle(g))
    swapped = validate_system(example1.matrices[::-1], example1.dwell_time)
    gp = build_discretization(swapped, 0.2)
    certp = run_ipa(gp, find_leading_cycle(gp))
    assert certp.rho_hat == pytest.approx(cert.rho_hat, rel=1e-9)
    assert certp.status is cert.status
    assert verify_certificate(gp, certp)
    # the permuted components define the same norms on a sample of points
    rng = np.random.default_rng(0)
    for x in rng.standard_normal((5, 2)):
        for j in range(2):
            assert norm_eval(certp.multinorm[1 - j], x) == pytest.approx(norm_eval(cert.multinorm[j], x), rel=1e-6)


def test_non_leading_cycle_gives_approximate_certificate(example2):
    g = build_discretization(example2, 0.4)
    leading = cycle_from_notation(DwellNotation(((1, 1.3), (0, 1.7))), g)
    weaker = next(c for c in enumerate_cycles(g, 4) if c.value < leading.value * (1 - 1e-3))
    cert = run_ipa(g, weaker, IpaConfig(max_iterations=4))
    assert cert.status is Status.APPROXIMATE
    assert cert.epsilon > 0
    # (1 + eps) rho still dominates the true leading value
    assert (1 + cert.epsilon) * cert.rho_hat >= leading.value * (1 - 1e-9)
    assert verify_certificate(g, cert)
