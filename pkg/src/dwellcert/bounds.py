"""Two-sided bounds on the Lyapunov exponent and the stability verdict."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cycles import DwellNotation, cycle_notation
from .errors import CertificateMismatch, DegenerateBall, DomainError, StepTooLarge
from .ipa import MultinormCertificate
from .linalg import mat_exp
from .polytope import PolytopeNorm, norm_eval, operator_norm
from .system import SwitchingSystem, build_discretization


class Verdict(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class BoundsReport:
    h: float
    m: float
    sigma_lower: float
    sigma_upper: float  # +inf when the quadratic gap is unavailable
    curvature: float
    leading_cycle: DwellNotation | None  # None: the multinorm is only approximate
    verdict: Verdict
    epsilon: float
    curvatures: tuple = ()

    @property
    def certified(self) -> bool:
        return self.leading_cycle is not None

    @property
    def gap(self) -> float:
        return self.sigma_upper - self.sigma_lower


def verdict_for(lower: float, upper: float) -> Verdict:
    if lower > 0:
        return Verdict.UNSTABLE
    if upper < 0:
        return Verdict.STABLE
    return Verdict.INCONCLUSIVE


def quadratic_bound_gap(C: float, m: float, h: float) -> float:
    """Exact gap ``-(1/m) ln(1 - C h^2 / 8)``, which is ``C h^2 / (8 m) + O(h^4)``."""
    if C < 0 or m <= 0 or h <= 0:
        raise DomainError("need C >= 0 and positive m, h")
    q = C * h * h / 8.0
    if not q < 1.0:
        raise DomainError(f"1 - C h^2/8 = {1 - q:.6g} is not positive (C = {C:.6g}, h = {h:.6g})")
    return -math.log1p(-q) / m


def _curvature_matrix(A: np.ndarray, sigma: float, positive: bool) -> np.ndarray:
    B = A - sigma * np.eye(A.shape[0])
    B = B @ B
    # in positive mode the norm is monotone, so |B| bounds B
    return np.abs(B) if positive else B


def _curvature(B: np.ndarray, P: PolytopeNorm) -> float:
    try:
        return operator_norm(B, P, P)
    except DegenerateBall:
        # a flat polytope bounds no operator leaving its span
        return math.inf


def lyapunov_bounds(cert: MultinormCertificate, sys: SwitchingSystem, h: float) -> BoundsReport:
    """Lower bound ``ln rho_hat`` and upper bound ``sigma_plus + quadratic gap``.

    The curvature constant is taken relative to ``sigma_plus`` (equal to
    ``sigma_minus`` for an exact certificate), the shift for which the
    multinorm is extremal.
    """
    if not math.isclose(cert.step, h, rel_tol=0, abs_tol=1e-15) or cert.dwell_time != sys.dwell_time:
        raise CertificateMismatch(f"certificate is for h={cert.step}, m={cert.dwell_time}")
    if len(cert.multinorm) != sys.n or cert.multinorm[0].dim != sys.dim:
        raise CertificateMismatch("certificate shape does not match the system")
    lower = cert.sigma_minus
    shift = cert.sigma_plus
    positive = cert.multinorm.variant.value == "positive"
    Cs = tuple(
        _curvature(_curvature_matrix(A, shift, positive), P) for A, P in zip(sys.matrices, cert.multinorm)
    )
    C = max(Cs)
    try:
        upper = shift + quadratic_bound_gap(C, sys.dwell_time, h) if math.isfinite(C) else math.inf
    except DomainError:
        upper = math.inf
    notation = None
    if cert.certified:
        g = build_discretization(sys, h)
        notation = cycle_notation(cert.leading_cycle, g)
    return BoundsReport(
        h=float(h),
        m=sys.dwell_time,
        sigma_lower=lower,
        sigma_upper=upper,
        curvature=C,
        leading_cycle=notation,
        verdict=verdict_for(lower, upper),
        epsilon=cert.epsilon,
        curvatures=Cs,
    )


def chord_bound_check(A, P: PolytopeNorm, x0, h: float, tau: float) -> bool:
    """Check ``||x(tau)|| <= max(||x(0)||, ||x(h)||) / (1 - h^2 ||A^2|| / 8)`` for ``x' = A x``."""
    A = np.asarray(A, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if not 0 <= tau <= h:
        raise ValueError("tau must lie in [0, h]")
    a2 = operator_norm(A @ A, P, P)
    denom = 1.0 - h * h * a2 / 8.0
    if h <= 0 or denom <= 0:
        raise StepTooLarge(f"h = {h} violates h^2 ||A^2|| < 8 (||A^2|| = {a2:.6g})")
    lhs = norm_eval(P, mat_exp(A, tau) @ x0)
    ends = max(norm_eval(P, x0), norm_eval(P, mat_exp(A, h) @ x0))
    # relative slack for the LP tolerance on both sides
    return lhs <= ends / denom * (1 + 1e-9) + 1e-12
