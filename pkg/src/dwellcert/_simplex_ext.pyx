# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dense two-phase primal simplex.

Mirrors ``_simplex_py.solve`` step by step (same pricing, ratio test,
anti-cycling switch and refactorisation schedule) so both backends return
the same basis on the same input.  The solve loop runs without the GIL.
"""

import numpy as np

from libc.math cimport fabs
from libc.stdlib cimport calloc, free

cdef enum:
    OPTIMAL = 0
    INFEASIBLE = 1
    UNBOUNDED = 2
    ITERATION_LIMIT = 3
    BLAND_AFTER = 30
    REFACTOR_EVERY = 64


cdef struct LP:
    int m
    int k
    double tol
    double *A          # m x k, row-major, rows sign-flipped so b >= 0
    double *b
    double *cost       # k structural costs of the current phase
    double *cost_art   # m artificial costs of the current phase
    double *Binv       # m x m
    double *xB
    int *basis
    char *isbasic      # k + m
    double *y
    double *u
    double *r
    double *work       # m x 2m scratch for refactorisation


cdef inline double _entry(LP *lp, int i, int j) nogil:
    if j < lp.k:
        return lp.A[i * lp.k + j]
    return 1.0 if j - lp.k == i else 0.0


cdef int _refactor(LP *lp) nogil:
    """Rebuild Binv from the basis by Gauss-Jordan; 1 if singular."""
    cdef int m = lp.m, w = 2 * m
    cdef int i, j, col, piv
    cdef double best, f, t
    cdef double *W = lp.work
    for i in range(m):
        for j in range(m):
            W[i * w + j] = _entry(lp, i, lp.basis[j])
            W[i * w + m + j] = 1.0 if i == j else 0.0
    for col in range(m):
        piv = col
        best = fabs(W[col * w + col])
        for i in range(col + 1, m):
            if fabs(W[i * w + col]) > best:
                best = fabs(W[i * w + col])
                piv = i
        if best < 1e-300:
            return 1
        if piv != col:
            for j in range(w):
                t = W[col * w + j]
                W[col * w + j] = W[piv * w + j]
                W[piv * w + j] = t
        f = W[col * w + col]
        for j in range(w):
            W[col * w + j] /= f
        for i in range(m):
            if i != col:
                f = W[i * w + col]
                if f != 0.0:
                    for j in range(w):
                        W[i * w + j] -= f * W[col * w + j]
    for i in range(m):
        for j in range(m):
            lp.Binv[i * m + j] = W[i * w + m + j]
    for i in range(m):
        t = 0.0
        for j in range(m):
            t += lp.Binv[i * m + j] * lp.b[j]
        lp.xB[i] = t if t > 0.0 else 0.0
    return 0


cdef void _column(LP *lp, int q) nogil:
    """u = Binv @ column q."""
    cdef int m = lp.m, k = lp.k, i, j
    cdef double t
    cdef double *Binv = lp.Binv
    cdef double *A = lp.A
    cdef double *u = lp.u
    for i in range(m):
        if q < k:
            t = 0.0
            for j in range(m):
                t += Binv[i * m + j] * A[j * k + q]
            u[i] = t
        else:
            u[i] = Binv[i * m + (q - k)]


cdef void _pivot(LP *lp, int p, int q) nogil:
    cdef int m = lp.m, i, j
    cdef double *xB = lp.xB
    cdef double *u = lp.u
    cdef double *Binv = lp.Binv
    cdef double *row = lp.Binv + p * m
    cdef double theta = xB[p] / u[p]
    cdef double up = u[p], ui
    for i in range(m):
        xB[i] -= theta * u[i]
        if xB[i] < 0.0:
            xB[i] = 0.0
    xB[p] = theta if theta > 0.0 else 0.0
    for j in range(m):
        row[j] /= up
    for i in range(m):
        if i != p:
            ui = u[i]
            if ui != 0.0:
                for j in range(m):
                    Binv[i * m + j] -= ui * row[j]
    lp.isbasic[lp.basis[p]] = 0
    lp.isbasic[q] = 1
    lp.basis[p] = q


cdef int _iterate(LP *lp, int max_iter) nogil:
    cdef int m = lp.m, k = lp.k
    cdef int it, i, j, q, p, bi
    cdef int bland = 0, streak = 0
    cdef double cb, yi, rj, best, ratio, bestratio, tol = lp.tol
    # local copies: extensions build with -fno-strict-aliasing, so loads
    # through the struct would be repeated after every store
    cdef double *A = lp.A
    cdef double *Ai
    cdef double *Binv = lp.Binv
    cdef double *y = lp.y
    cdef double *r = lp.r
    cdef double *u = lp.u
    cdef double *xB = lp.xB
    cdef double *cost = lp.cost
    cdef double *cost_art = lp.cost_art
    cdef int *basis = lp.basis
    cdef char *isbasic = lp.isbasic
    for it in range(max_iter):
        if it > 0 and it % REFACTOR_EVERY == 0:
            _refactor(lp)
        for j in range(m):
            y[j] = 0.0
        for i in range(m):
            bi = basis[i]
            cb = cost[bi] if bi < k else cost_art[bi - k]
            if cb != 0.0:
                for j in range(m):
                    y[j] += cb * Binv[i * m + j]
        for j in range(k):
            r[j] = cost[j]
        for i in range(m):
            yi = y[i]
            if yi != 0.0:
                Ai = A + i * k
                for j in range(k):
                    r[j] -= yi * Ai[j]
        q = -1
        if bland:
            for j in range(k):
                if not isbasic[j] and r[j] < -tol:
                    q = j
                    break
        else:
            best = 0.0
            for j in range(k):
                rj = 0.0 if isbasic[j] else r[j]
                if q < 0 or rj < best:
                    best = rj
                    q = j
            if best >= -tol:
                q = -1
        if q < 0:
            return OPTIMAL
        _column(lp, q)
        bestratio = -1.0
        for i in range(m):
            if u[i] > tol:
                ratio = xB[i] / u[i]
                if bestratio < 0.0 or ratio < bestratio:
                    bestratio = ratio
        if bestratio < 0.0:
            return UNBOUNDED
        p = -1
        for i in range(m):
            if u[i] > tol and xB[i] / u[i] <= bestratio + tol:
                if p < 0:
                    p = i
                elif bland:
                    if basis[i] < basis[p]:
                        p = i
                elif u[i] > u[p]:
                    p = i
        if xB[p] / u[p] <= tol:
            streak += 1
        else:
            streak = 0
        if streak > BLAND_AFTER:
            bland = 1
        _pivot(lp, p, q)
    return ITERATION_LIMIT


cdef int _run(LP *lp, double *c, int max_iter) nogil:
    cdef int m = lp.m, k = lp.k
    cdef int i, j, p, q, status
    cdef double infeas = 0.0, scale = 1.0, best, v, t
    cdef double *A = lp.A
    cdef double *Binv = lp.Binv
    cdef char *isbasic = lp.isbasic
    for i in range(m):
        if lp.b[i] + 1.0 > scale:
            scale = lp.b[i] + 1.0
    # phase 1
    for j in range(k):
        lp.cost[j] = 0.0
    for i in range(m):
        lp.cost_art[i] = 1.0
    status = _iterate(lp, max_iter)
    if status == ITERATION_LIMIT:
        return ITERATION_LIMIT
    for i in range(m):
        if lp.basis[i] >= k:
            infeas += lp.xB[i]
    if infeas > lp.tol * scale:
        return INFEASIBLE
    # drive zero-level artificials out where a structural pivot exists
    for p in range(m):
        if lp.basis[p] < k:
            continue
        q = -1
        best = 0.0
        for j in range(k):
            if isbasic[j]:
                continue
            t = 0.0
            for i in range(m):
                t += Binv[p * m + i] * A[i * k + j]
            v = fabs(t)
            if q < 0 or v > best:
                best = v
                q = j
        if q >= 0 and best > lp.tol:
            _column(lp, q)
            _pivot(lp, p, q)
    # phase 2
    for j in range(k):
        lp.cost[j] = c[j]
    for i in range(m):
        lp.cost_art[i] = 0.0
    return _iterate(lp, max_iter)


def solve(A, b, c, double tol=1e-9, int max_iter=0):
    """Return ``(status, objective, x, y)``; see ``_simplex_py.solve``."""
    cdef double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64).copy()
    cdef double[::1] bv = np.array(b, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef int m = Av.shape[0], k = Av.shape[1]
    cdef int i, j, status
    if bv.shape[0] != m or cv.shape[0] != k:
        raise ValueError("inconsistent LP dimensions")
    if max_iter <= 0:
        max_iter = 50 * (m + k) + 1000
    sign = np.ones(m)
    cdef double[::1] sv = sign
    for i in range(m):
        if bv[i] < 0:
            sv[i] = -1.0
            bv[i] = -bv[i]
            for j in range(k):
                Av[i, j] = -Av[i, j]

    cdef LP lp
    lp.m = m
    lp.k = k
    lp.tol = tol
    lp.A = &Av[0, 0] if m > 0 and k > 0 else NULL
    lp.b = &bv[0] if m > 0 else NULL
    lp.cost = <double *> calloc(k + 1, sizeof(double))
    lp.cost_art = <double *> calloc(m + 1, sizeof(double))
    lp.Binv = <double *> calloc(m * m + 1, sizeof(double))
    lp.xB = <double *> calloc(m + 1, sizeof(double))
    lp.basis = <int *> calloc(m + 1, sizeof(int))
    lp.isbasic = <char *> calloc(k + m + 1, sizeof(char))
    lp.y = <double *> calloc(m + 1, sizeof(double))
    lp.u = <double *> calloc(m + 1, sizeof(double))
    lp.r = <double *> calloc(k + 1, sizeof(double))
    lp.work = <double *> calloc(2 * m * m + 1, sizeof(double))
    if (lp.cost == NULL or lp.cost_art == NULL or lp.Binv == NULL or lp.xB == NULL
            or lp.basis == NULL or lp.isbasic == NULL or lp.y == NULL or lp.u == NULL
            or lp.r == NULL or lp.work == NULL):
        _free(&lp)
        raise MemoryError()

    x = np.zeros(k)
    y = np.zeros(m)
    cdef double[::1] xv = x
    cdef double[::1] yv = y
    cdef double obj = 0.0
    try:
        for i in range(m):
            lp.basis[i] = k + i
            lp.isbasic[k + i] = 1
            lp.Binv[i * m + i] = 1.0
            lp.xB[i] = bv[i]
        with nogil:
            status = _run(&lp, &cv[0] if k > 0 else NULL, max_iter)
        if status == INFEASIBLE:
            return INFEASIBLE, np.inf, x, y
        if status == ITERATION_LIMIT:
            return ITERATION_LIMIT, np.nan, x, y
        for i in range(m):
            if lp.basis[i] < k:
                xv[lp.basis[i]] = lp.xB[i]
            yv[i] = lp.y[i] * sv[i]
        for j in range(k):
            obj += cv[j] * xv[j]
        return status, obj, x, y
    finally:
        _free(&lp)


cdef void _free(LP *lp):
    free(lp.cost)
    free(lp.cost_art)
    free(lp.Binv)
    free(lp.xB)
    free(lp.basis)
    free(lp.isbasic)
    free(lp.y)
    free(lp.u)
    free(lp.r)
    free(lp.work)
