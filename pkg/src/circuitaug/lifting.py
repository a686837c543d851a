"""Lifting operators on (rescaled) kernels and their singular value decompositions.

For a subspace ``W`` and a partition ``(B, N)`` the lifting operator maps
``z_N`` in ``pi_N(W)`` to the ``B`` part of the minimum-norm ``w`` in ``W``
with ``w_N = z_N``. With ``M`` an orthonormal basis of ``W`` this is
``M_B M_N^+``. Its SVD is taken with the domain restricted to ``pi_N(W)``, so
there are exactly ``dim pi_N(W)`` singular values (zeros padded).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import numeric as nm

RANK_TOL = 1e-10


class LiftingError(ValueError):
    pass


def _orth(K: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the column space of ``K``."""
    if K.size == 0:
        return np.zeros((K.shape[0], 0))
    u, s, _ = np.linalg.svd(K, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0]))) if s.size else 0
    return u[:, :r]


@dataclass(frozen=True)
class SubspaceBasis:
    M: np.ndarray
    scaling: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def dim(self) -> int:
        return self.M.shape[1]

    @classmethod
    def kernel(cls, A, scaling=None) -> "SubspaceBasis":
        """Orthonormal basis of ``ker(A)``, or of ``diag(scaling)^{-1} ker(A)``."""
        A = nm.to_float(A)
        if scaling is None:
            return cls(nm.nullspace(A))
        y = np.asarray(nm.to_float(scaling), dtype=float)
        if np.any(y <= 0):
            raise LiftingError("scaling must be positive")
        return cls(nm.nullspace(A * y[None, :]), y)

    @classmethod
    def span(cls, K) -> "SubspaceBasis":
        return cls(_orth(np.asarray(K, dtype=float)))

    def rescaled(self, y) -> "SubspaceBasis":
        """Basis of ``diag(y)^{-1} W``."""
        y = np.asarray(nm.to_float(y), dtype=float)
        if np.any(y <= 0):
            raise LiftingError("rescaling vector must be positive")
        base = np.ones(self.n) if self.scaling is None else self.scaling
        return SubspaceBasis(_orth(self.M / y[:, None]), base * y)


def _index(idx) -> np.ndarray:
    return np.asarray(sorted(int(i) for i in idx), dtype=int)


def min_norm_lift(basis: SubspaceBasis, N: Sequence[int], zN, eps_proj: float = 1e-8) -> np.ndarray:
    """Minimum-norm ``w`` in ``W`` with ``w_N = zN``."""
    N = _index(N)
    zN = np.asarray(zN, dtype=float)
    MN = basis.M[N]
    coef = np.linalg.pinv(MN, rcond=RANK_TOL) @ zN
    w = basis.M @ coef
    if np.linalg.norm(w[N] - zN) > eps_proj * (1.0 + np.linalg.norm(zN)):
        raise LiftingError("zN is not in the projection of W onto N")
    return w


@dataclass(frozen=True)
class LiftingOperator:
    B: tuple
    N: tuple
    op_matrix: np.ndarray  # |B| x |N|
    domain: np.ndarray  # |N| x r orthonormal basis of pi_N(W)
    singular_values: np.ndarray  # length r, nonincreasing
    right_basis: np.ndarray  # |N| x r, columns in pi_N(W)
    left_basis: np.ndarray  # |B| x min(|B|, r)

    @property
    def dim(self) -> int:
        return self.domain.shape[1]

    def sigma(self, k: int) -> float:
        """``sigma_k`` with ``sigma_0 = inf``."""
        if k == 0:
            return math.inf
        if not 1 <= k <= self.dim:
            raise IndexError(f"singular value index {k} outside 0..{self.dim}")
        return float(self.singular_values[k - 1])

    def __call__(self, zN) -> np.ndarray:
        return self.op_matrix @ np.asarray(zN, dtype=float)

    def in_domain(self, zN, eps_proj: float = 1e-8) -> bool:
        zN = np.asarray(zN, dtype=float)
        resid = zN - self.domain @ (self.domain.T @ zN)
        return np.linalg.norm(resid) <= eps_proj * (1.0 + np.linalg.norm(zN))


def build_operator(basis: SubspaceBasis, B: Sequence[int], N: Sequence[int]) -> LiftingOperator:
    B, N = _index(B), _index(N)
    if N.size == 0:
        raise LiftingError("N must be nonempty")
    if set(B.tolist()) & set(N.tolist()) or B.size + N.size != basis.n:
        raise LiftingError("(B, N) must partition the coordinates")
    MB, MN = basis.M[B], basis.M[N]
    op = MB @ np.linalg.pinv(MN, rcond=RANK_TOL)
    Q = _orth(MN)
    r = Q.shape[1]
    T = op @ Q
    if r == 0:
        return LiftingOperator(tuple(B), tuple(N), op, Q, np.zeros(0), Q, np.zeros((B.size, 0)))
    if B.size == 0:
        s, vt, u = np.zeros(0), np.eye(r), np.zeros((0, 0))
    else:
        u, s, vt = np.linalg.svd(T, full_matrices=True)
    sig = np.zeros(r)
    sig[:s.size] = s
    return LiftingOperator(tuple(B), tuple(N), op, Q, sig, Q @ vt.T, u[:, :min(B.size, r)])


def rescale_operator(basis: SubspaceBasis, y, B, N) -> LiftingOperator:
    """Operator of ``diag(y)^{-1} W`` for the same partition."""
    return build_operator(basis.rescaled(y), B, N)


def count_sigma(op: LiftingOperator, lo: float, hi: float = math.inf) -> int:
    """Number of singular values in ``[lo, hi)``."""
    if lo > hi:
        raise ValueError("empty interval")
    s = op.singular_values
    return int(np.sum((s >= lo) & (s < hi)))


def singular_subspace(op: LiftingOperator, d: int, check: bool = True) -> np.ndarray:
    """Right singular vectors of the ``d`` smallest singular values."""
    if not 0 <= d <= op.dim:
        raise ValueError(f"d={d} outside 0..{op.dim}")
    V = op.right_basis[:, op.dim - d:]
    if check and d > 0:
        k = op.dim - d
        norm = np.linalg.norm(op.op_matrix @ V, 2)
        bound = op.sigma(k + 1)
        if norm > bound + 1e-9 * (1.0 + op.singular_values[0]):
            raise ArithmeticError("restricted operator norm exceeds sigma_{k+1}")
    return V


def project_and_lift(op: LiftingOperator, Vd: np.ndarray, zN, strict: bool = True):
    """Project ``zN`` onto ``span(Vd)`` and lift. ``strict`` checks ``zN`` is in the domain."""
    zN = np.asarray(zN, dtype=float)
    if strict and not op.in_domain(zN):
        raise LiftingError("zN is not in the projection of W onto N")
    proj = Vd @ (Vd.T @ zN) if Vd.size else np.zeros_like(zN)
    return proj, op(proj)
