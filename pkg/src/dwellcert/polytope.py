"""Polytope norms and multinorms, evaluated by linear programming.

A polytope norm is given by a vertex list ``V``.  The symmetric variant has
unit ball ``co_s(V) = conv(V u -V)``; the positive variant (for Metzler
systems) has unit ball ``co_+(V) = {x >= 0 : x <= y, y in co_s(V)}``.
Vertices are never reduced to a facet description.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import lp
from .errors import DegenerateBall, DimensionMismatch, LPError, NegativeInput, OrthantViolation

LP_TOL = 1e-9
# relative size of negative entries silently clipped to zero in positive mode
CLIP_TOL = 1e-12
# columns below this max-abs carry no usable direction
_TINY = 1e-290


class Variant(str, Enum):
    SYMMETRIC = "symmetric"
    POSITIVE = "positive"


def clip_orthant(x: np.ndarray, what: str = "vector") -> np.ndarray:
    """Zero out rounding-level negatives; raise on genuine ones."""
    x = np.asarray(x, dtype=float)
    lo = x.min(initial=0.0)
    if lo < 0:
        if -lo > CLIP_TOL * max(np.abs(x).max(), 1e-300):
            raise NegativeInput(f"{what} leaves the nonnegative orthant (entry {lo:.3g})")
        x = np.maximum(x, 0.0)
    return x


def minkowski_lp(cols: np.ndarray, positive: bool = False):
    """Equilibrated LP data ``(A, c)`` for the Minkowski functional of ``cols``.

    Columns are scaled to unit max-abs with cost ``1/scale``, so vertices of
    very different magnitudes stay usable under the absolute pivot
    tolerance.  ``A`` is None when no column is usable.
    """
    scale = np.max(np.abs(cols), axis=0, initial=0.0)
    usable = scale > _TINY
    cols, scale = cols[:, usable] / scale[usable], scale[usable]
    d, k = cols.shape
    if k == 0:
        return None, None
    if positive:
        A = np.hstack([cols, -np.eye(d)])
        c = np.concatenate([1.0 / scale, np.zeros(d)])
    else:
        A = np.hstack([cols, -cols])
        c = np.tile(1.0 / scale, 2)
    return A, c


def solve_minkowski(data, x: np.ndarray, positive: bool = False, tol: float = LP_TOL) -> float:
    """Evaluate the functional for LP data from :func:`minkowski_lp`."""
    x = np.asarray(x, dtype=float)
    if positive:
        x = clip_orthant(x, "query point")
    s = float(np.max(np.abs(x), initial=0.0))
    if s == 0.0:
        return 0.0
    A, c = data
    if A is None:
        return math.inf
    status, obj, _, _ = lp.solve(A, x / s, c, tol)
    if status == lp.INFEASIBLE:
        return math.inf
    if status != lp.OPTIMAL:
        raise LPError(f"simplex returned status {status}")
    return obj * s


def minkowski(cols: np.ndarray, x: np.ndarray, positive: bool = False, tol: float = LP_TOL) -> float:
    """Minkowski functional of the polytope spanned by the columns of ``cols``.

    Returns ``inf`` when ``x`` is not in the cone/span of the vertices.
    """
    return solve_minkowski(minkowski_lp(cols, positive), x, positive, tol)


@dataclass(frozen=True, eq=False)
class PolytopeNorm:
    vertices: np.ndarray  # (k, d), one vertex per row
    variant: Variant = Variant.SYMMETRIC
    _cols: np.ndarray = field(init=False, repr=False)
    _lp: tuple = field(init=False, repr=False)

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        if V.ndim != 2:
            raise DimensionMismatch("vertices must be a 2-D array (one vertex per row)")
        if not np.all(np.isfinite(V)):
            raise ValueError("vertices must be finite")
        variant = Variant(self.variant)
        if variant is Variant.POSITIVE and V.size:
            V = np.vstack([clip_orthant(v, "vertex") for v in V])
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "_cols", np.ascontiguousarray(V.T))
        object.__setattr__(self, "_lp", minkowski_lp(self._cols, variant is Variant.POSITIVE))

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def positive(self) -> bool:
        return self.variant is Variant.POSITIVE

    @property
    def spans(self) -> bool:
        if self.vertices.shape[0] == 0:
            return False
        return np.linalg.matrix_rank(self.vertices) == self.dim

    def __call__(self, x) -> float:
        return norm_eval(self, x)


def _check_dim(P: PolytopeNorm, x: np.ndarray):
    if x.shape != (P.dim,):
        raise DimensionMismatch(f"expected a {P.dim}-vector, got shape {x.shape}")


def norm_eval(P: PolytopeNorm, x) -> float:
    x = np.asarray(x, dtype=float)
    _check_dim(P, x)
    val = solve_minkowski(P._lp, x, P.positive)
    if math.isinf(val):
        raise DegenerateBall("point is outside the span of the polytope vertices")
    return val


def contains(P: PolytopeNorm, x, delta: float = 0.0) -> bool:
    x = np.asarray(x, dtype=float)
    _check_dim(P, x)
    return solve_minkowski(P._lp, x, P.positive) <= 1.0 + delta


def operator_norm(B, src: PolytopeNorm, dst: PolytopeNorm) -> float:
    """Induced norm of ``B`` from ``src`` to ``dst``: max over vertices of src."""
    B = np.asarray(B, dtype=float)
    if src.variant is not dst.variant:
        raise ValueError("polytope variants differ")
    if B.shape != (dst.dim, src.dim):
        raise DimensionMismatch(f"matrix shape {B.shape} does not map R^{src.dim} to R^{dst.dim}")
    best = 0.0
    for v in src.vertices:
        w = B @ v
        if dst.positive:
            try:
                w = clip_orthant(w, "image")
            except NegativeInput as exc:
                raise OrthantViolation(str(exc)) from None
        best = max(best, norm_eval(dst, w))
    return best


@dataclass(frozen=True, eq=False)
class Multinorm:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if comps and len({c.variant for c in comps}) > 1:
            raise ValueError("all components must share one variant")
        object.__setattr__(self, "components", comps)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, j) -> PolytopeNorm:
        return self.components[j]

    def __iter__(self):
        return iter(self.components)

    @property
    def variant(self) -> Variant:
        return self.components[0].variant


def edge_excess(E: np.ndarray, duration: float, src: PolytopeNorm, dst: PolytopeNorm, rho: float) -> float:
    """Largest ``||E v||_dst / rho**duration`` over the vertices of ``src``."""
    scale = rho ** duration
    worst = 0.0
    for v in src.vertices:
        w = E @ v
        if dst.positive:
            w = clip_orthant(w, "edge image")
        val = solve_minkowski(dst._lp, w, dst.positive)
        worst = max(worst, val / scale)
    return worst


def check_extremality(g, M: Multinorm, rho: float) -> float:
    """Smallest ``eps >= 0`` with ``||E_ji x||_j <= ((1+eps) rho)**h_ji ||x||_i``.

    ``eps`` is a per-unit-time excess, so ``ln((1+eps) rho)`` bounds the
    growth rate of the graph system.  ``inf`` if an image leaves the span of
    its target polytope.
    """
    if len(M) != g.vertex_count:
        raise DimensionMismatch(f"{len(M)} components for {g.vertex_count} graph vertices")
    if any(c.dim != g.dim for c in M):
        raise DimensionMismatch("component dimension differs from the graph dimension")
    eps = 0.0
    for e in g.edges:
        ratio = edge_excess(e.operator, e.duration, M[e.source], M[e.target], rho)
        if math.isinf(ratio):
            return math.inf
        if ratio > 0:
            eps = max(eps, ratio ** (1.0 / e.duration) - 1.0)
    return eps
