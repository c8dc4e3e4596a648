"""Invariant polytope construction for the h-discretisation.

Starting from the periodic trajectory of the leading eigenvector, images of
new vertices are added to the per-mode polytopes until every image is
absorbed.  The resulting multinorm is extremal: each edge operator of the
graph system, rescaled by the leading cycle value, is a contraction from the
source polytope into the target polytope.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .cycles import Cycle, make_cycle
from .errors import ComplexLeading, NumericalError, OrthantViolation, VertexBudgetExceeded
from .linalg import leading_eigenpair
from .polytope import Multinorm, PolytopeNorm, Variant, check_extremality, clip_orthant, minkowski_lp, solve_minkowski
from .system import GraphSystem

log = logging.getLogger(__name__)

# additive slack for the independent certificate check
VERIFY_SLACK = 1e-9
# relative slack when matching the stored rho_hat against the recomputed cycle value
RHO_RTOL = 1e-9


class Status(str, Enum):
    CERTIFIED = "certified"
    APPROXIMATE = "approximate"


@dataclass(frozen=True)
class IpaConfig:
    max_iterations: int = 200
    max_vertices_per_mode: int = 20000
    delta: float = 1e-10
    positive_mode: bool = False

    def __post_init__(self):
        if self.max_iterations < 1 or self.max_vertices_per_mode < 1:
            raise ValueError("iteration and vertex budgets must be positive")
        if not self.delta >= 0:
            raise ValueError("delta must be nonnegative")


@dataclass(frozen=True, eq=False)
class MultinormCertificate:
    rho_hat: float
    multinorm: Multinorm
    epsilon: float
    leading_cycle: Cycle
    iterations_used: int
    status: Status
    step: float
    dwell_time: float

    @property
    def sigma_minus(self) -> float:
        return math.log(self.rho_hat)

    @property
    def sigma_plus(self) -> float:
        return math.log((1.0 + self.epsilon) * self.rho_hat)

    @property
    def certified(self) -> bool:
        return self.status is Status.CERTIFIED

    @property
    def vertex_counts(self) -> tuple:
        return tuple(P.vertices.shape[0] for P in self.multinorm)


class _VertexSet:
    """Growable vertex store for one mode."""

    def __init__(self, d: int):
        self._buf = np.empty((16, d))
        self.size = 0
        self._lp = {}

    def add(self, x: np.ndarray):
        if self.size == self._buf.shape[0]:
            self._buf = np.vstack([self._buf, np.empty_like(self._buf)])
        self._buf[self.size] = x
        self.size += 1
        self._lp.clear()

    @property
    def rows(self) -> np.ndarray:
        return self._buf[: self.size]

    def contains(self, x: np.ndarray, positive: bool, delta: float) -> bool:
        data = self._lp.get(positive)
        if data is None:
            data = self._lp[positive] = minkowski_lp(self.rows.T, positive)
        return solve_minkowski(data, x, positive) <= 1.0 + delta


def _image(E: np.ndarray, x: np.ndarray, positive: bool) -> np.ndarray:
    y = E @ x
    if positive:
        try:
            y = clip_orthant(y, "trajectory point")
        except NumericalError as exc:
            raise OrthantViolation(str(exc)) from None
    return y


def _grow(V: list, fresh: list, loops: list, cross: list, cfg: IpaConfig, it: int) -> tuple:
    """Map fresh vertices along every edge until nothing new is added.

    Returns ``(absorbed, iterations)``; ``absorbed`` is False when a budget
    ran out first.  Candidates go modes ascending, sources in insertion order.
    """
    n = len(V)
    positive = cfg.positive_mode
    while it < cfg.max_iterations:
        it += 1
        added = 0
        upcoming = [[] for _ in range(n)]
        for j in range(n):
            for s in range(n):
                op = loops[j] if s == j else cross[j]
                for p in fresh[s]:
                    y = _image(op, p, positive)
                    if V[j].contains(y, positive, cfg.delta):
                        continue
                    V[j].add(y)
                    upcoming[j].append(y)
                    added += 1
                    if V[j].size > cfg.max_vertices_per_mode:
                        return False, it
        log.debug("ipa iteration %d: %d added, sizes %s", it, added, [v.size for v in V])
        fresh = upcoming
        if added == 0:
            return True, it
    return False, it


def _complete(V: list, positive: bool) -> list:
    """Coordinate directions that make every flat polytope full-dimensional.

    An invariant set that does not span the space is not a norm ball (this
    happens for reducible families, e.g. a single regime).  Appending unit
    directions at the polytope's own scale and resuming the iteration keeps
    invariance while restoring a proper norm.
    """
    out = []
    for S in V:
        rows = S.rows
        d = rows.shape[1]
        scale = float(np.max(np.abs(rows), initial=0.0)) or 1.0
        extra = []
        if positive:
            covered = np.any(rows > 0, axis=0)
            extra = [scale * np.eye(d)[i] for i in range(d) if not covered[i]]
        else:
            basis = rows
            for i in range(d):
                if np.linalg.matrix_rank(basis) == d:
                    break
                cand = np.vstack([basis, scale * np.eye(d)[i]])
                if np.linalg.matrix_rank(cand) > np.linalg.matrix_rank(basis):
                    basis = cand
                    extra.append(scale * np.eye(d)[i])
        for x in extra:
            S.add(x)
        out.append(extra)
    return out


def run_ipa(g: GraphSystem, cycle: Cycle, config: IpaConfig | None = None) -> MultinormCertificate:
    """Build an invariant multinorm for ``g`` around its leading ``cycle``."""
    cfg = config or IpaConfig()
    if not cycle.path.closed:
        raise ValueError("the leading path is not a cycle")
    if cycle.value <= 0:
        raise ComplexLeading("cycle product is nilpotent")
    positive = cfg.positive_mode
    if positive and any(np.any(e.operator < -1e-12 * np.abs(e.operator).max()) for e in g.edges):
        raise OrthantViolation("positive mode needs nonnegative edge operators")
    rho = cycle.value
    gs = g.shifted(math.log(rho))
    n, d = g.vertex_count, g.dim

    x = leading_eigenpair(cycle.path.matrix).vector
    if positive:
        x = clip_orthant(x, "leading eigenvector")
    V = [_VertexSet(d) for _ in range(n)]
    fresh = [[] for _ in range(n)]
    for idx in cycle.edges:
        e = gs.edges[idx]
        x = _image(e.operator, x, positive)
        if V[e.target].size == 0 or not V[e.target].contains(x, positive, cfg.delta):
            V[e.target].add(x)
            fresh[e.target].append(x)

    loops = [gs.edges[gs.edge_index(j, j)].operator for j in range(n)]
    cross = [None] * n
    for e in gs.edges:
        if not e.is_loop:
            cross[e.target] = e.operator

    it = 0
    status = Status.APPROXIMATE
    while True:
        done, it = _grow(V, fresh, loops, cross, cfg, it)
        if not done:
            break
        status = Status.CERTIFIED
        fresh = _complete(V, positive)
        if not any(fresh):
            break
        status = Status.APPROXIMATE
        log.debug("ipa: completing flat polytopes with %s directions", [len(f) for f in fresh])

    variant = Variant.POSITIVE if positive else Variant.SYMMETRIC
    M = Multinorm(tuple(PolytopeNorm(v.rows.copy(), variant) for v in V))
    if status is Status.CERTIFIED:
        eps = 0.0
    else:
        eps = check_extremality(gs, M, 1.0)
        if not math.isfinite(eps):
            raise VertexBudgetExceeded("approximate multinorm does not span the state space")
    return MultinormCertificate(rho, M, eps, cycle, it, status, g.step, g.dwell_time)


@dataclass
class Verification:
    ok: bool
    violations: list = field(default_factory=list)
    max_excess: float = 0.0

    def __bool__(self) -> bool:
        return self.ok


def verify_certificate(g: GraphSystem, cert: MultinormCertificate) -> Verification:
    """Recheck a certificate from scratch with fresh LP solves.

    Checks that ``rho_hat`` equals the value of the stored cycle and that
    ``||E v||_j / rho_hat**t <= (1+eps)**t ||v||_i + slack`` for every edge
    ``i -> j`` and every vertex ``v`` of polytope ``i``. The slack is applied
    after dividing by ``rho_hat**t`` so it does not depend on the growth rate.
    """
    out = Verification(True)
    M = cert.multinorm
    rho = cert.rho_hat
    if len(M) != g.vertex_count or any(P.dim != g.dim for P in M):
        out.ok = False
        out.violations.append("multinorm shape does not match the system")
        return out
    if not (rho > 0 and math.isfinite(rho)) or not (cert.epsilon >= 0):
        out.ok = False
        out.violations.append("rho_hat or epsilon out of range")
        return out
    try:
        value = make_cycle(g, cert.leading_cycle.edges).value
    except (NumericalError, ValueError, IndexError) as exc:
        value = math.nan
        out.violations.append(f"stored cycle is invalid: {exc}")
    if not abs(value - rho) <= RHO_RTOL * rho:
        out.ok = False
        out.violations.append(f"rho_hat {rho!r} differs from the cycle value {value!r}")
    positive = M.variant is Variant.POSITIVE
    if positive and any(np.any(P.vertices < 0) for P in M):
        out.ok = False
        out.violations.append("positive polytope has a negative vertex")
    for idx, e in enumerate(g.edges):
        src, dst = M[e.source], M[e.target]
        scale = rho ** -e.duration
        bound = (1.0 + cert.epsilon) ** e.duration
        for vi, v in enumerate(src.vertices):
            w = e.operator @ v
            if positive:
                w = np.maximum(w, 0.0) if w.min() >= -1e-12 * np.abs(w).max(initial=0) else w
                if w.min() < 0:
                    out.ok = False
                    out.violations.append(f"edge {idx}: image of vertex {vi} leaves the orthant")
                    continue
            lhs = solve_minkowski(dst._lp, w, positive) * scale
            rhs = bound * solve_minkowski(src._lp, v, positive)
            excess = lhs - rhs
            if excess > out.max_excess:
                out.max_excess = excess
            if not excess <= VERIFY_SLACK:
                out.ok = False
                out.violations.append(f"edge {idx} ({e.source}->{e.target}), vertex {vi}: {lhs:.12g} > {rhs:.12g}")
    return out
