"""Tableau pivoting kernels.

The float64 path is compiled with numba when available. Setting the
environment variable ``CIRCUITAUG_NO_NUMBA=1`` (before import) selects the
pure-numpy implementation instead; exact (object-dtype) tableaus always use
the numpy path.
"""
import os

import numpy as np

USE_NUMBA = os.environ.get("CIRCUITAUG_NO_NUMBA", "0").lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def pivot_numpy(T, r, c):
    T[r] = T[r] / T[r, c]
    col = T[:, c].copy()
    col[r] = 0
    nz = np.nonzero(col != 0)[0]
    if nz.size:
        T[nz] -= np.outer(col[nz], T[r])


def entering_numpy(cost, ncols, tol, bland):
    best = -1
    best_val = -tol
    for j in range(ncols):
        v = cost[j]
        if v < -tol:
            if bland:
                return j
            if v < best_val:
                best_val = v
                best = j
    return best


def ratio_numpy(T, c, rhs, basis, tol):
    """Minimum-ratio row for entering column ``c`` (ties: smallest basic index)."""
    m = T.shape[0] - 1
    best = -1
    best_ratio = None
    for i in range(m):
        a = T[i, c]
        if a > tol:
            q = T[i, rhs] / a
            if best < 0 or q < best_ratio or (q == best_ratio and basis[i] < basis[best]):
                best, best_ratio = i, q
    return best


if USE_NUMBA:

    @njit(cache=True)
    def pivot_numba(T, r, c):
        rows, cols = T.shape
        p = T[r, c]
        for j in range(cols):
            T[r, j] /= p
        for i in range(rows):
            if i == r:
                continue
            f = T[i, c]
            if f != 0.0:
                for j in range(cols):
                    T[i, j] -= f * T[r, j]
            T[i, c] = 0.0

    @njit(cache=True)
    def entering_numba(cost, ncols, tol, bland):
        best = -1
        best_val = -tol
        for j in range(ncols):
            v = cost[j]
            if v < -tol:
                if bland:
                    return j
                if v < best_val:
                    best_val = v
                    best = j
        return best

    @njit(cache=True)
    def ratio_numba(T, c, rhs, basis, tol):
        m = T.shape[0] - 1
        best = -1
        best_ratio = 0.0
        for i in range(m):
            a = T[i, c]
            if a > tol:
                q = T[i, rhs] / a
                if best < 0 or q < best_ratio or (q == best_ratio and basis[i] < basis[best]):
                    best = i
                    best_ratio = q
        return best


def pivot(T, r, c):
    if USE_NUMBA and T.dtype == np.float64:
        pivot_numba(T, r, c)
    else:
        pivot_numpy(T, r, c)


def entering(cost, ncols, tol, bland):
    if USE_NUMBA and cost.dtype == np.float64:
        return entering_numba(cost, ncols, tol, bland)
    return entering_numpy(cost, ncols, tol, bland)


def ratio(T, c, rhs, basis, tol):
    if USE_NUMBA and T.dtype == np.float64:
        return ratio_numba(T, c, rhs, basis, tol)
    return ratio_numpy(T, c, rhs, basis, tol)
