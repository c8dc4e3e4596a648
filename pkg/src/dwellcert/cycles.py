"""Leading-cycle search on a graph system.

Two strategies: exhaustive enumeration of closed paths up to a length, and
the Markovian modified Gripenberg beam search, which reaches cycles with
hundreds of edges.  Products are carried as a normalised matrix plus a log
scale so long paths neither overflow nor underflow.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, MalformedCycle, NoCycleFound, NotClosed
from .linalg import spectral_radius
from .system import GraphSystem

LN2 = math.log(2.0)

DEFAULT_BEAM = 100
DEFAULT_DEPTH = 2000
DEFAULT_ENUM_LENGTH = 12
DEFAULT_ENUM_CAP = 10**7
# a second, wide and shallow beam pass catches short cycles the deep pass misses
WIDE_BEAM = 1000
WIDE_DEPTH = 100
# log-rates closer than this are treated as ties
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PathProduct:
    start: int
    end: int
    edges: tuple
    matrix: np.ndarray  # normalised; product = exp(log_scale) * matrix
    log_scale: float
    total_time: float

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def product(self) -> np.ndarray:
        return math.exp(self.log_scale) * self.matrix if np.isfinite(self.log_scale) else 0 * self.matrix

    @property
    def closed(self) -> bool:
        return self.start == self.end


@dataclass(frozen=True, eq=False)
class Cycle:
    path: PathProduct
    value: float

    @property
    def edges(self) -> tuple:
        return self.path.edges

    @property
    def total_time(self) -> float:
        return self.path.total_time

    @property
    def length(self) -> int:
        return self.path.length

    @property
    def log_value(self) -> float:
        return math.log(self.value) if self.value > 0 else -math.inf


def path_product(g: GraphSystem, edges: Sequence[int]) -> PathProduct:
    edges = tuple(int(e) for e in edges)
    if not edges:
        raise ValueError("a path needs at least one edge")
    d = g.dim
    M = np.eye(d)
    exp2 = 0
    T = 0.0
    prev = None
    for idx in edges:
        e = g.edges[idx]
        if prev is not None and e.source != prev:
            raise MalformedCycle(f"edge {idx} does not start where the previous edge ended")
        M = e.operator @ M
        k = _exponent(np.linalg.norm(M, 2))
        M = np.ldexp(M, -k)
        exp2 += k
        T += e.duration
        prev = e.target
    log_scale = exp2 * LN2 if np.any(M) else -math.inf
    return PathProduct(g.edges[edges[0]].source, prev, edges, M, log_scale, T)


def _exponent(s):
    """Power of two bringing a positive norm into [1, 2); 0 for a zero norm.

    Products are rescaled by powers of two so the scaling itself is exact.
    """
    _, e = np.frexp(s)
    return np.where(np.asarray(s) > 0, e - 1, 0) if np.ndim(s) else (int(e) - 1 if s > 0 else 0)


def _value(matrix: np.ndarray, log_scale: float, T: float) -> float:
    r = spectral_radius(matrix)
    if r == 0 or not np.isfinite(log_scale):
        return 0.0
    return math.exp((math.log(r) + log_scale) / T)


def cycle_value(p: PathProduct) -> float:
    """``rho(product) ** (1 / total_time)``."""
    if not p.closed:
        raise NotClosed(f"path starts at {p.start} but ends at {p.end}")
    return _value(p.matrix, p.log_scale, p.total_time)


def make_cycle(g: GraphSystem, edges: Sequence[int]) -> Cycle:
    p = path_product(g, edges)
    return Cycle(p, cycle_value(p))


def cycle_key(c: Cycle):
    """Sort key: value descending, then shorter time, then edge sequence."""
    lv = c.log_value
    return (-round(lv, 11) if np.isfinite(lv) else math.inf, round(c.total_time, 9), c.edges)


def _min_rotation(seq: tuple) -> tuple:
    return min(seq[i:] + seq[:i] for i in range(len(seq)))


def count_closed_walks(g: GraphSystem, N: int) -> int:
    adj = np.zeros((g.vertex_count, g.vertex_count), dtype=object)
    for e in g.edges:
        adj[e.target, e.source] += 1
    total = 0
    P = np.identity(g.vertex_count, dtype=object)
    for _ in range(N):
        P = adj.dot(P)
        total += int(np.trace(P))
    return total


def enumerate_cycles(g: GraphSystem, N: int = DEFAULT_ENUM_LENGTH, cap: int = DEFAULT_ENUM_CAP) -> list:
    """All closed paths with at most ``N`` edges, one per rotation class."""
    if N < 1:
        raise ValueError("N must be >= 1")
    walks = count_closed_walks(g, N)
    if walks > cap:
        raise BudgetExceeded(f"{walks} closed walks of length <= {N} exceed the cap {cap}")

    ops = [e.operator for e in g.edges]
    found_seq: list = []
    found_mat: list = []
    found_log: list = []
    found_time: list = []

    def dfs(first: int, start: int, v: int, seq: list, M: np.ndarray, exp2: int, T: float):
        if v == start:
            t = tuple(seq)
            if _min_rotation(t) == t:
                found_seq.append(t)
                found_mat.append(M)
                found_log.append(exp2 * LN2 if np.any(M) else -math.inf)
                found_time.append(T)
        if len(seq) == N:
            return
        for idx in g.out_edges(v):
            # the minimal rotation starts with its smallest edge index
            if idx < first:
                continue
            e = g.edges[idx]
            P = ops[idx] @ M
            k = _exponent(np.linalg.norm(P))
            seq.append(idx)
            dfs(first, start, e.target, seq, np.ldexp(P, -k), exp2 + k, T + e.duration)
            seq.pop()

    d = g.dim
    for first, e in enumerate(g.edges):
        k = _exponent(np.linalg.norm(e.operator))
        dfs(first, e.source, e.target, [first], np.ldexp(e.operator, -k), k, e.duration)

    if not found_seq:
        return []
    mats = np.stack(found_mat) if found_mat else np.zeros((0, d, d))
    rho = np.max(np.abs(np.linalg.eigvals(mats)), axis=1)
    cycles = []
    for seq, M, ls, T, r in zip(found_seq, found_mat, found_log, found_time, rho):
        value = math.exp((math.log(r) + ls) / T) if r > 0 and np.isfinite(ls) else 0.0
        cycles.append(Cycle(PathProduct(g.edges[seq[0]].source, g.edges[seq[-1]].target, seq, M, ls, T), value))
    cycles.sort(key=cycle_key)
    return cycles


def gripenberg_search(
    g: GraphSystem,
    beam: int = DEFAULT_BEAM,
    depth: int = DEFAULT_DEPTH,
    max_candidates: int = 50,
):
    """Markovian modified Gripenberg search for a leading cycle.

    Iteration ``k`` extends every retained product by every admissible
    edge, scores the closed ones by ``rho(E) ** (1/T(E))`` and keeps the
    ``beam/2`` products of largest and ``beam/2`` of smallest
    ``||E||_2 ** (1/T(E))``.  Returns ``(best, candidates)``, where
    ``candidates`` holds up to ``max_candidates`` cycles from the running
    maximiser set, best first.
    """
    if beam < 2 or beam % 2:
        raise ValueError(f"beam must be a positive even integer >= 2, got {beam}")
    if depth < 1:
        raise ValueError("depth must be >= 1")

    ops = np.stack([e.operator for e in g.edges])
    dur = np.array([e.duration for e in g.edges])
    src = np.array([e.source for e in g.edges])
    tgt = np.array([e.target for e in g.edges])
    out_lists = [np.array(g.out_edges(v), dtype=int) for v in range(g.vertex_count)]
    half = beam // 2

    # history[k-1] = (parent position in step k-1, edge index) for every
    # product generated at step k, before pruning
    history: list = []
    rho_max = -math.inf
    # records: (neg_rate, T, step, pos, matrix, log_scale, start)
    pool: list = []

    with np.errstate(divide="ignore", invalid="ignore"):
        start = src.copy()
        end = tgt.copy()
        norms = _spectral_norms(ops)
        exps = _exponent(norms)
        mats = np.ldexp(ops, -exps[:, None, None])
        # log of the true norm; log of the true scale is exps * LN2
        lognorm = np.where(norms > 0, np.log(norms), -np.inf)
        T = dur.copy()
        parents = np.full(len(g.edges), -1)
        edge_ids = np.arange(len(g.edges))
        # positions of the retained products within the current step's arrays
        kept = np.arange(len(g.edges))

        for k in range(1, depth + 1):
            if k > 1:
                counts = np.array([len(out_lists[v]) for v in end])
                b_idx = np.repeat(np.arange(len(end)), counts)
                e_idx = np.concatenate([out_lists[v] for v in end]) if len(end) else np.zeros(0, int)
                new = np.matmul(ops[e_idx], mats[b_idx])
                norms = _spectral_norms(new)
                prev = exps[b_idx]
                k_new = _exponent(norms)
                mats = np.ldexp(new, -k_new[:, None, None])
                exps = prev + k_new
                lognorm = np.where(norms > 0, prev * LN2 + np.log(np.where(norms > 0, norms, 1.0)), -np.inf)
                T = T[b_idx] + dur[e_idx]
                start = start[b_idx]
                end = tgt[e_idx]
                parents = kept[b_idx]
                edge_ids = e_idx
                kept = np.arange(len(e_idx))
            history.append((parents, edge_ids))

            closed = np.flatnonzero(start == end)
            if closed.size and np.isfinite(rho_max):
                # rho(E) <= ||E||, so products whose norm rate is already
                # below the best value cannot reach it
                closed = closed[lognorm[closed] / T[closed] >= rho_max - TIE_TOL]
            if closed.size:
                rho = np.max(np.abs(np.linalg.eigvals(mats[closed])), axis=1)
                rates = np.where(rho > 0, (np.log(np.where(rho > 0, rho, 1.0)) + exps[closed] * LN2) / T[closed], -np.inf)
                rho_k = float(np.max(rates))
                if np.isfinite(rho_k):
                    winners = closed[rates >= rho_k - TIE_TOL]
                    if rho_k > rho_max + TIE_TOL:
                        rho_max = rho_k
                        pool = []
                    for pos in winners[:max_candidates]:
                        rec = (-round(rho_k, 11), round(float(T[pos]), 9), k, int(pos),
                               mats[pos].copy(), float(exps[pos] * LN2), int(start[pos]))
                        if len(pool) < max_candidates:
                            heapq.heappush(pool, _Neg(rec))
                        elif _Neg(rec) > pool[0]:
                            heapq.heapreplace(pool, _Neg(rec))

            if len(end) > beam:
                rate = lognorm / T
                order = np.argsort(-rate, kind="stable")
                keep = np.sort(np.concatenate([order[:half], order[-half:]]))
                mats, exps, lognorm = mats[keep], exps[keep], lognorm[keep]
                T, start, end = T[keep], start[keep], end[keep]
                kept = kept[keep]

    if not pool:
        raise NoCycleFound("no closed product was generated; check the graph")

    records = sorted((n.rec for n in pool), key=lambda r: r[:4])
    candidates = []
    for neg_rate, Tt, step, pos, M, ls, s in records:
        seq = _trace(history, step, pos)
        p = PathProduct(s, s, seq, M, ls, _time(g, seq))
        candidates.append(Cycle(p, _value(M, ls, p.total_time)))
    candidates.sort(key=cycle_key)
    return candidates[0], candidates


def _spectral_norms(mats: np.ndarray) -> np.ndarray:
    """Batched operator 2-norms via the largest eigenvalue of M^T M."""
    gram = np.matmul(np.swapaxes(mats, 1, 2), mats)
    return np.sqrt(np.maximum(np.linalg.eigvalsh(gram)[:, -1], 0.0))


class _Neg:
    """Heap wrapper keeping the *best* records (smallest sort key)."""

    __slots__ = ("rec",)

    def __init__(self, rec):
        self.rec = rec

    def __lt__(self, other):
        return self.rec[:4] > other.rec[:4]

    def __gt__(self, other):
        return self.rec[:4] < other.rec[:4]


def _trace(history: list, step: int, pos: int) -> tuple:
    seq = []
    for k in range(step - 1, -1, -1):
        parents, edges = history[k]
        seq.append(int(edges[pos]))
        pos = int(parents[pos])
    seq.reverse()
    return tuple(seq)


def _time(g: GraphSystem, seq: Sequence[int]) -> float:
    return float(sum(g.edges[i].duration for i in seq))


def find_leading_cycle(
    g: GraphSystem,
    enum_length: int = DEFAULT_ENUM_LENGTH,
    beam: int = DEFAULT_BEAM,
    depth: int = DEFAULT_DEPTH,
    enum_cap: int = DEFAULT_ENUM_CAP,
    wide_beam: int = WIDE_BEAM,
    wide_depth: int = WIDE_DEPTH,
) -> Cycle:
    """Best cycle from enumeration (when within budget) and two beam searches.

    The deep pass (``beam``, ``depth``) reaches long cycles; the wide pass
    (``wide_beam``, ``wide_depth``) keeps enough products alive to find
    short cycles whose prefixes have middling norms.  Either pass is
    skipped when its depth is 0.
    """
    pool = []
    if enum_length > 0:
        try:
            found = enumerate_cycles(g, enum_length, enum_cap)
            pool.extend(found[:1])
        except BudgetExceeded:
            pass
    for b, k in ((beam, depth), (wide_beam, wide_depth)):
        if k > 0:
            best, _ = gripenberg_search(g, b, k)
            pool.append(best)
    if not pool:
        raise NoCycleFound("no search strategy produced a cycle")
    return min(pool, key=cycle_key)


# -- dwell notation ----------------------------------------------------------

@dataclass(frozen=True)
class DwellNotation:
    """Blocks ``(mode, duration)``; mode indices are 0-based."""

    blocks: tuple

    def __str__(self) -> str:
        return "(" + "; ".join(_fmt_time(t) for _, t in self.blocks) + ")"

    def describe(self, labels=None) -> str:
        name = (lambda j: labels[j]) if labels else (lambda j: f"A{j + 1}")
        return ", ".join(f"{name(j)}:{_fmt_time(t)}" for j, t in self.blocks)


def _fmt_time(t: float) -> str:
    if math.isinf(t):
        return "inf"
    s = f"{t:.6f}".rstrip("0")
    whole, _, frac = s.partition(".")
    return f"{whole}.{frac.ljust(2, '0')}"


def _blocks_of(c: Cycle, g: GraphSystem) -> list:
    """Split into [mode, loop_count] runs, each opened by a cross edge."""
    seq = list(c.edges)
    first_cross = next((i for i, e in enumerate(seq) if not g.edges[e].is_loop), None)
    if first_cross is None:
        if g.vertex_count == 1:
            return [[g.edges[seq[0]].target, len(seq), True]]
        raise MalformedCycle("cycle consists of loops only; no cross edge opens a dwell block")
    seq = seq[first_cross:] + seq[:first_cross]
    blocks = []
    for idx in seq:
        e = g.edges[idx]
        if not e.is_loop:
            blocks.append([e.target, 0, False])
        elif e.target != blocks[-1][0]:
            raise MalformedCycle(f"loop at mode {e.target} follows a block of mode {blocks[-1][0]}")
        else:
            blocks[-1][1] += 1
    return blocks


def to_dwell_notation(c: Cycle, g: GraphSystem) -> DwellNotation:
    """Block durations of a cycle, ``m + k h`` per block.

    The listing starts with a block entered from the lowest-indexed mode in
    the cycle; among such rotations the one with lexicographically smallest
    loop counts is used.
    """
    if not c.path.closed:
        raise NotClosed("not a cycle")
    blocks = _blocks_of(c, g)
    h, m = g.step, g.dwell_time
    if blocks[0][2]:
        j, k, _ = blocks[0]
        return DwellNotation(((j, k * h),))
    B = len(blocks)
    low = min(b[0] for b in blocks)
    starts = [r for r in range(B) if blocks[r - 1][0] == low]
    rot = min(starts, key=lambda r: [(blocks[(r + i) % B][1], blocks[(r + i) % B][0]) for i in range(B)])
    ordered = blocks[rot:] + blocks[:rot]
    return DwellNotation(tuple((j, m + k * h) for j, k, _ in ordered))


def cycle_notation(c: Cycle, g: GraphSystem) -> DwellNotation:
    """Like ``to_dwell_notation`` but maps a pure loop cycle to ``(j, inf)``.

    A cycle made of loops only means staying in one mode forever, which is
    admissible under any dwell time.
    """
    targets = {g.edges[i].target for i in c.edges}
    if g.vertex_count > 1 and all(g.edges[i].is_loop for i in c.edges) and len(targets) == 1:
        return DwellNotation(((targets.pop(), math.inf),))
    return to_dwell_notation(c, g)


def cycle_from_notation(notation: DwellNotation, g: GraphSystem) -> Cycle:
    """Rebuild the edge sequence of a cycle from its dwell notation."""
    h, m = g.step, g.dwell_time
    blocks = notation.blocks
    if not blocks:
        raise MalformedCycle("empty notation")
    if len(blocks) == 1 and math.isinf(blocks[0][1]):
        j = blocks[0][0]
        return make_cycle(g, [g.edge_index(j, j)])
    if g.vertex_count == 1:
        (j, t), = blocks
        k = int(round(t / h))
        return make_cycle(g, [g.edge_index(j, j)] * k)
    seq = []
    prev = blocks[-1][0]
    for j, t in blocks:
        k = int(round((t - m) / h))
        if k < 0 or abs(m + k * h - t) > 1e-9 * max(1.0, t):
            raise MalformedCycle(f"duration {t} is not m + k*h")
        if j == prev:
            raise MalformedCycle("consecutive blocks must have different modes")
        seq.append(g.edge_index(prev, j))
        seq.extend([g.edge_index(j, j)] * k)
        prev = j
    return make_cycle(g, seq)
