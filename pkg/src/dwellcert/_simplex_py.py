"""Reference (numpy) implementation of the dense two-phase primal simplex.

Solves ``min c.x  s.t.  A x = b, x >= 0`` for problems with few rows and
many columns, the shape of every Minkowski-functional LP in this package.
The compiled kernel in ``_simplex_ext.pyx`` follows this code step by step.

Status codes: 0 optimal, 1 infeasible, 2 unbounded, 3 iteration limit.
"""

import numpy as np

OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT = 0, 1, 2, 3

# consecutive degenerate pivots before switching to Bland's rule for good
BLAND_AFTER = 30
REFACTOR_EVERY = 64


def solve(A, b, c, tol=1e-9, max_iter=0):
    """Return ``(status, objective, x, y)`` with ``y`` the dual row prices."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    m, k = A.shape
    if max_iter <= 0:
        max_iter = 50 * (m + k) + 1000

    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b *= sign

    basis = np.arange(k, k + m)
    Binv = np.eye(m)
    xB = b.copy()
    scale = 1.0 + np.max(np.abs(b), initial=0.0)

    def column(j):
        if j < k:
            return A[:, j]
        e = np.zeros(m)
        e[j - k] = 1.0
        return e

    def refactor():
        B = np.column_stack([column(j) for j in basis])
        inv = np.linalg.inv(B)
        return inv, np.maximum(inv @ b, 0.0)

    def pivot(p, q, u):
        nonlocal xB
        theta = xB[p] / u[p]
        xB = xB - theta * u
        xB[p] = theta
        np.maximum(xB, 0.0, out=xB)
        row = Binv[p] / u[p]
        Binv[:] -= np.outer(u, row)
        Binv[p] = row
        basis[p] = q

    def iterate(cost, max_iter):
        nonlocal Binv, xB
        bland = False
        streak = 0
        for it in range(max_iter):
            if it and it % REFACTOR_EVERY == 0:
                Binv, xB = refactor()
            cB = np.array([cost[j] if j < k else cost_art[j - k] for j in basis])
            y = cB @ Binv
            r = cost - y @ A
            r[basis[basis < k]] = 0.0
            if bland:
                neg = np.flatnonzero(r < -tol)
                if neg.size == 0:
                    return OPTIMAL, y
                q = int(neg[0])
            else:
                q = int(np.argmin(r))
                if r[q] >= -tol:
                    return OPTIMAL, y
            u = Binv @ A[:, q]
            rows = np.flatnonzero(u > tol)
            if rows.size == 0:
                return UNBOUNDED, y
            ratios = xB[rows] / u[rows]
            best = ratios.min()
            tied = rows[ratios <= best + tol]
            if bland:
                p = int(tied[np.argmin(basis[tied])])
            else:
                p = int(tied[np.argmax(u[tied])])
            streak = streak + 1 if xB[p] / u[p] <= tol else 0
            if streak > BLAND_AFTER:
                bland = True
            pivot(p, q, u)
        return ITERATION_LIMIT, y

    # phase 1: artificial basis, minimise the sum of artificials
    cost_art = np.ones(m)
    status, _ = iterate(np.zeros(k), max_iter)
    if status == ITERATION_LIMIT:
        return ITERATION_LIMIT, np.nan, np.zeros(k), np.zeros(m)
    infeas = sum(xB[i] for i in range(m) if basis[i] >= k)
    if infeas > tol * scale:
        return INFEASIBLE, np.inf, np.zeros(k), np.zeros(m)

    # drive zero-level artificials out of the basis where possible
    for p in range(m):
        if basis[p] < k:
            continue
        row = Binv[p] @ A
        row[basis[basis < k]] = 0.0
        q = int(np.argmax(np.abs(row)))
        if abs(row[q]) > tol:
            u = Binv @ A[:, q]
            pivot(p, q, u)

    cost_art = np.zeros(m)
    status, y = iterate(c, max_iter)
    x = np.zeros(k)
    mask = basis < k
    x[basis[mask]] = xB[mask]
    return status, float(c @ x), x, y * sign
