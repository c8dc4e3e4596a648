"""Switching systems with dwell time and their h-discretisations.

The h-discretisation is a dynamical system on the complete graph over the
``n`` modes: the loop at vertex ``j`` applies ``exp(h A_j)`` and lasts ``h``,
every cross edge ``i -> j`` applies ``exp(m A_j)`` and lasts ``m``.  A point
sitting at vertex ``j`` has just been moved by mode ``j``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyFamily,
    NonFiniteEntry,
    NonpositiveDwellTime,
    NotSquare,
    StepNonpositive,
    StepTooLarge,
)
from .linalg import mat_exp


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SwitchingSystem:
    matrices: tuple
    dwell_time: float
    labels: tuple | None = None

    @property
    def n(self) -> int:
        return len(self.matrices)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    def label(self, j: int) -> str:
        return self.labels[j] if self.labels else f"A{j + 1}"

    def same_as(self, other: "SwitchingSystem") -> bool:
        return (
            self.n == other.n
            and self.dim == other.dim
            and self.dwell_time == other.dwell_time
            and all(np.array_equal(a, b) for a, b in zip(self.matrices, other.matrices))
        )


def validate_system(matrices: Sequence, m: float, labels: Sequence[str] | None = None) -> SwitchingSystem:
    mats = list(matrices)
    if not mats:
        raise EmptyFamily("the control set is empty")
    arrays = []
    for idx, M in enumerate(mats):
        a = np.array(M, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise NotSquare(f"matrix {idx + 1} is not square: shape {a.shape}")
        arrays.append(a)
    d = arrays[0].shape[0]
    for idx, a in enumerate(arrays):
        if a.shape != (d, d):
            raise DimensionMismatch(f"matrix {idx + 1} is {a.shape[0]}x{a.shape[1]}, expected {d}x{d}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteEntry(f"matrix {idx + 1} has non-finite entries")
    if not np.isfinite(m):
        raise NonFiniteEntry("dwell time must be finite")
    if m <= 0:
        raise NonpositiveDwellTime(f"dwell time must be positive, got {m}")
    if labels is not None:
        labels = tuple(str(s) for s in labels)
        if len(labels) != len(arrays):
            raise DimensionMismatch(f"{len(labels)} labels for {len(arrays)} matrices")
    for i in range(len(arrays)):
        for j in range(i):
            if np.array_equal(arrays[i], arrays[j]):
                warnings.warn(f"regimes {j + 1} and {i + 1} are identical", stacklevel=2)
    return SwitchingSystem(tuple(_frozen(a) for a in arrays), float(m), labels)


@dataclass(frozen=True, eq=False)
class Edge:
    source: int
    target: int
    operator: np.ndarray
    duration: float

    @property
    def is_loop(self) -> bool:
        return self.source == self.target


@dataclass(frozen=True, eq=False)
class GraphSystem:
    """Dynamical system on a graph; edges are fixed in construction order."""

    vertex_count: int
    edges: tuple
    step: float
    dwell_time: float
    shift: float = 0.0

    def __post_init__(self):
        out = [[] for _ in range(self.vertex_count)]
        for idx, e in enumerate(self.edges):
            out[e.source].append(idx)
        object.__setattr__(self, "_out", tuple(tuple(o) for o in out))

    @property
    def dim(self) -> int:
        return self.edges[0].operator.shape[0]

    def out_edges(self, v: int) -> tuple:
        return self._out[v]

    def edge_index(self, source: int, target: int) -> int:
        for idx in self._out[source]:
            if self.edges[idx].target == target:
                return idx
        raise KeyError((source, target))

    def shifted(self, sigma: float) -> "GraphSystem":
        """Same graph for the regimes ``A_j - sigma I``.

        Uses ``exp(t (A - sigma I)) = exp(-sigma t) exp(t A)``.
        """
        edges = tuple(
            Edge(e.source, e.target, _frozen(np.exp(-sigma * e.duration) * e.operator), e.duration)
            for e in self.edges
        )
        return GraphSystem(self.vertex_count, edges, self.step, self.dwell_time, self.shift + sigma)


def build_discretization(sys: SwitchingSystem, h: float) -> GraphSystem:
    """Loops first (by mode), then cross edges ordered by (target, source)."""
    if not np.isfinite(h) or h <= 0:
        raise StepNonpositive(f"step must be positive, got {h}")
    m = sys.dwell_time
    if h > m:
        raise StepTooLarge(f"step {h} exceeds the dwell time {m}")
    loops = [mat_exp(A, h) for A in sys.matrices]
    cross = [mat_exp(A, m) for A in sys.matrices]
    edges = [Edge(j, j, _frozen(loops[j]), float(h)) for j in range(sys.n)]
    for j in range(sys.n):
        for i in range(sys.n):
            if i != j:
                edges.append(Edge(i, j, _frozen(cross[j]), float(m)))
    return GraphSystem(sys.n, tuple(edges), float(h), float(m))


@dataclass(frozen=True, eq=False)
class ShiftedSystem:
    base: SwitchingSystem
    shift: float

    @property
    def matrices(self) -> tuple:
        d = self.base.dim
        return tuple(_frozen(A - self.shift * np.eye(d)) for A in self.base.matrices)

    def as_system(self) -> SwitchingSystem:
        return SwitchingSystem(self.matrices, self.base.dwell_time, self.base.labels)


def shift_system(sys: SwitchingSystem, sigma: float) -> ShiftedSystem:
    if not np.isfinite(sigma):
        raise NonFiniteEntry("shift must be finite")
    return ShiftedSystem(sys, float(sigma))


def is_metzler_matrix(A) -> bool:
    a = np.asarray(A, dtype=float)
    off = a[~np.eye(a.shape[0], dtype=bool)]
    return bool(np.all(off >= 0))


def is_metzler(sys: SwitchingSystem) -> bool:
    return all(is_metzler_matrix(A) for A in sys.matrices)
