"""Dense real matrix kernels used throughout the package."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ComplexLeading, NonFiniteEntry, NotSquare

# |Im(lambda)| <= REAL_TOL * |lambda| counts as real
REAL_TOL = 1e-9


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    a = np.array(M, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NotSquare(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteEntry(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: float
    vector: np.ndarray


def mat_exp(A, t: float = 1.0) -> np.ndarray:
    """Return ``exp(t*A)`` (Pade scaling and squaring)."""
    a = as_matrix(A)
    if not np.isfinite(t):
        raise NonFiniteEntry("t must be finite")
    if t == 0:
        return np.eye(a.shape[0])
    return scipy.linalg.expm(t * a)


def spectral_radius(M) -> float:
    a = as_matrix(M)
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def operator_2norm(M) -> float:
    a = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NonFiniteEntry("matrix has non-finite entries")
    return float(np.linalg.norm(a, 2))


def leading_eigenpair(M) -> EigenPair:
    """Real dominant eigenvalue with a unit eigenvector.

    The vector is scaled so its largest-magnitude entry is positive; for a
    nonnegative matrix this yields the (nonnegative) Perron vector.  Raises
    :class:`ComplexLeading` if the dominant eigenvalue is not real, or if a
    different eigenvalue shares its modulus (e.g. ``+1`` and ``-1``).
    """
    a = as_matrix(M)
    w, V = np.linalg.eig(a)
    mods = np.abs(w)
    i = int(np.argmax(mods))
    lam = w[i]
    r = mods[i]
    if r == 0.0:
        raise ComplexLeading("matrix is nilpotent; no dominant eigenvalue")
    if abs(lam.imag) > REAL_TOL * r:
        raise ComplexLeading(f"dominant eigenvalue {lam} is not real")
    rivals = (mods >= r * (1 - REAL_TOL)) & (np.abs(w - lam) > REAL_TOL * r)
    if np.any(rivals):
        raise ComplexLeading(f"dominant eigenvalue {lam.real} is not simple: {w[rivals]}")

    v = np.real(V[:, i])
    lam = float(lam.real)
    if np.linalg.norm(a @ v - lam * v) > REAL_TOL * max(operator_2norm(a), np.finfo(float).tiny):
        # balancing can break down on badly scaled input; take the null
        # vector of M - lam I instead
        v = np.linalg.svd(a - lam * np.eye(len(a)))[2][-1]
    if np.all(a >= 0):
        # Perron vector: sign pattern is uniform up to rounding noise near zero
        v = np.abs(v)
    v = v / np.linalg.norm(v)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return EigenPair(lam, v)
