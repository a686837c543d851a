"""Elementary vectors of ker(A): predicates, brute-force enumeration, conformal decomposition."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import numeric as nm
from .lp_kernel import solve_standard

MAX_ENUM_N = 16
_SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class ElementaryVector:
    z: np.ndarray
    support: tuple

    def normalized(self) -> "ElementaryVector":
        return ElementaryVector(normalize(self.z), self.support)


def _abs(z):
    return np.array([abs(v) for v in z]) if nm.is_exact(z) else np.abs(np.asarray(z, dtype=float))


def support(z, rel_tol: float = _SUPPORT_TOL) -> tuple:
    if nm.is_exact(z):
        return tuple(int(i) for i in np.flatnonzero([v != 0 for v in z]))
    a = _abs(z)
    top = a.max() if a.size else 0.0
    return tuple(int(i) for i in np.flatnonzero(a > rel_tol * top))


def scale_inf(z):
    """Scale to unit max-norm, keeping the sign pattern."""
    top = max(_abs(z)) if len(z) else 0
    if top == 0:
        return z
    return z / top


def normalize(z):
    """Unit max-norm with the first nonzero coordinate positive."""
    z = scale_inf(z)
    for i in support(z):
        return -z if z[i] < 0 else z
    return z


def _nullity(A_S, exact: bool) -> int:
    k = A_S.shape[1]
    if A_S.shape[0] == 0:
        return k
    return k - nm.rank(A_S if exact else np.asarray(A_S, dtype=float))


def is_elementary(A, z, tol: float = 1e-8) -> bool:
    """True iff ``Az`` vanishes and the support columns of ``A`` have nullity one."""
    exact = nm.is_exact(z)
    A = nm.to_exact(A) if exact else np.asarray(A, dtype=float)
    if not exact:
        z = np.asarray(z, dtype=float)
    a = _abs(z)
    if a.size == 0 or a.max() <= (0 if exact else 1e-9):
        raise ValueError("is_elementary requires a nonzero vector")
    S = list(support(z))
    resid = A.dot(z)
    if exact:
        if any(r != 0 for r in resid):
            return False
    else:
        scale = (np.abs(A).max() if A.size else 1.0) * a.max()
        if resid.size and np.abs(resid).max() > tol * max(1.0, scale):
            return False
    return _nullity(A[:, S], exact) == 1


def enumerate_circuits(A) -> list:
    """All circuits of ``A`` as normalized elementary vectors, one per pair ``{z, -z}``."""
    exact = nm.is_exact(A)
    A = A if exact else np.asarray(A, dtype=float)
    m, n = A.shape
    if n > MAX_ENUM_N:
        raise ValueError(f"circuit enumeration is limited to n <= {MAX_ENUM_N} (got {n})")
    r = nm.rank(A)
    out = []
    for size in range(1, min(r + 1, n) + 1):
        for S in combinations(range(n), size):
            sub = A[:, list(S)]
            K = nm.nullspace(sub)
            if K.shape[1] != 1:
                continue
            h = K[:, 0]
            if len(support(h)) != size:
                continue
            z = nm.zeros(n, exact)
            z[list(S)] = h
            z = normalize(z)
            if not exact:
                z[np.abs(z) <= _SUPPORT_TOL] = 0.0
            out.append(ElementaryVector(z, S))
    return out


def _conformal_circuit(A_S, sign, exact: bool):
    """A vertex of ``{A_S diag(sign) y = 0, sum(y) = 1, y >= 0}``."""
    k = A_S.shape[1]
    ones = nm.to_exact(np.ones((1, k))) if exact else np.ones((1, k))
    M = np.concatenate([A_S * sign[None, :], ones], axis=0)
    rhs = nm.zeros(A_S.shape[0] + 1, exact)
    rhs[-1] = nm.ONE if exact else 1.0
    sol = solve_standard(M, rhs, nm.zeros(k, exact), exact=exact)
    if sol.status != "optimal":
        raise ArithmeticError("vector is not in the kernel: no conformal circuit found")
    return sol.x * sign


def conformal_decompose(A, z) -> list:
    """Write ``z`` as a positive combination of conformal elementary vectors.

    Each peel zeroes at least one coordinate of the residual and lowers the
    dimension of the kernel restricted to its support, so at most
    ``dim ker(A)`` terms are produced.
    """
    exact = nm.is_exact(z)
    A = nm.to_exact(A) if exact else np.asarray(A, dtype=float)
    r = z.copy() if exact else np.asarray(z, dtype=float).copy()
    n = r.size
    top = max(_abs(r)) if n else 0
    snap = 0 if exact else 1e-12 * top
    terms = []
    while True:
        if not exact:
            r[np.abs(r) <= snap] = 0.0
        S = [i for i in range(n) if r[i] != 0]
        if not S:
            return terms
        sign = np.array([1 if r[i] > 0 else -1 for i in S], dtype=object if exact else float)
        if exact:
            sign = nm.to_exact(sign)
        hS = _conformal_circuit(A[:, S], sign, exact)
        h = nm.zeros(n, exact)
        h[S] = hS
        h = scale_inf(h)
        if not exact:
            h[np.abs(h) <= _SUPPORT_TOL] = 0.0
        hs = [i for i in S if h[i] != 0]
        j = min(hs, key=lambda i: r[i] / h[i])
        alpha = r[j] / h[j]
        r = r - alpha * h
        r[j] = 0
        terms.append((alpha, ElementaryVector(h, tuple(hs))))
        if len(terms) > n:
            raise ArithmeticError("conformal decomposition did not terminate")
