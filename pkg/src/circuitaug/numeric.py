"""Scalar backends: IEEE doubles or exact rationals stored in object arrays."""
from __future__ import annotations

import math

import numpy as np

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    from fractions import Fraction as Q

INF = math.inf
ZERO = Q(0)
ONE = Q(1)


def is_exact(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def to_exact(a) -> np.ndarray:
    """Convert to an object array of rationals (floats convert exactly)."""
    arr = np.asarray(a)
    out = np.empty(arr.shape, dtype=object)
    flat_in = arr.ravel()
    flat_out = out.ravel()
    for k, v in enumerate(flat_in):
        flat_out[k] = _q(v)
    return out


def _q(v):
    if isinstance(v, type(ONE)):
        return v
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            raise ValueError("cannot convert non-finite value to a rational")
        return Q(float(v))
    if isinstance(v, (int, np.integer)):
        return Q(int(v))
    return Q(v)


def to_float(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype == object:
        return np.array([float(v) for v in arr.ravel()], dtype=float).reshape(arr.shape)
    return arr.astype(float)


def like(template, a) -> np.ndarray:
    """Cast ``a`` to the backend of ``template``."""
    return to_exact(a) if is_exact(template) else np.asarray(a, dtype=float)


def zeros(n, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(n, dtype=object)
        out.fill(ZERO)
        return out
    return np.zeros(n)


def to_str(v) -> str:
    return str(v)


def exact_rref(M: np.ndarray):
    """Reduced row echelon form over the rationals. Returns (R, pivot_columns)."""
    R = to_exact(M).copy()
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        nz = [i for i in range(r, rows) if R[i, c] != 0]
        if not nz:
            continue
        p = nz[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        R[r] = R[r] / R[r, c]
        for i in range(rows):
            if i != r and R[i, c] != 0:
                R[i] = R[i] - R[i, c] * R[r]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(M: np.ndarray, tol: float = 1e-9) -> int:
    if M.size == 0:
        return 0
    if is_exact(M):
        return len(exact_rref(M)[1])
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def nullspace(M: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Columns spanning ker(M); rational basis in exact mode, orthonormal otherwise."""
    rows, cols = M.shape
    if is_exact(M):
        R, piv = exact_rref(M)
        free = [c for c in range(cols) if c not in piv]
        basis = np.empty((cols, len(free)), dtype=object)
        basis.fill(ZERO)
        for k, f in enumerate(free):
            basis[f, k] = ONE
            for r, p in enumerate(piv):
                basis[p, k] = -R[r, f]
        return basis
    if rows == 0:
        return np.eye(cols)
    u, s, vt = np.linalg.svd(np.asarray(M, dtype=float))
    r = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    return vt[r:].T.copy()


def solve(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a square nonsingular system in the backend of ``M``."""
    if is_exact(M):
        rhs = to_exact(rhs)
        two_d = rhs.ndim == 2
        R = np.concatenate([M, rhs if two_d else rhs[:, None]], axis=1)
        R, piv = exact_rref(R)
        n = M.shape[0]
        if piv[:n] != list(range(n)):
            raise np.linalg.LinAlgError("singular matrix")
        sol = R[:n, n:]
        return sol if two_d else sol[:, 0]
    return np.linalg.solve(np.asarray(M, dtype=float), np.asarray(rhs, dtype=float))


def log_or_neg_inf(v: float) -> float:
    return math.log(v) if v > 0 else -INF
