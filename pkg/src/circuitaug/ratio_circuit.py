"""Minimum-ratio circuits with dual certificates, and the Wallacher step built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import numeric as nm
from .lp_kernel import solve_with_ineq_row
from .lp_model import LpInstance

EPS_TERM = 1e-9
SNAP_REL = 1e-11
NOISE_ROW = 1e-9


class UnboundedOracle(ArithmeticError):
    """The split LP is unbounded, so the instance itself is unbounded."""


class UnboundedStep(ArithmeticError):
    """Augmentation direction has no negative coordinate."""


@dataclass
class RatioCircuitResult:
    z: Optional[np.ndarray]
    y: Optional[np.ndarray]
    s: Optional[np.ndarray]
    lam: object
    status: str  # optimal | unbounded
    pivots: int = 0

    @property
    def is_zero(self) -> bool:
        return self.z is None or not any(v != 0 for v in self.z)


def _matrix(A, exact):
    if isinstance(A, LpInstance):
        return A.data(exact)[0]
    return nm.to_exact(A) if exact else np.asarray(A, dtype=float)


def _row_value(z, v, w) -> float:
    """``<v,z+> + <w,z->`` over finite weights."""
    v, w = np.asarray(v, dtype=float), np.asarray(w, dtype=float)
    pos, neg = np.maximum(z, 0.0), np.maximum(-z, 0.0)
    fv, fw = np.isfinite(v), np.isfinite(w)
    return float(v[fv] @ pos[fv] + w[fw] @ neg[fw])


def ratio_circuit(A, u, v, w, exact: bool = False) -> RatioCircuitResult:
    """Solve ``min <u,z>`` over ``Az = 0``, ``<v,z+> + <w,z-> <= 1``.

    Infinite entries of ``v`` (``w``) forbid positive (negative) coordinates.
    """
    A = _matrix(A, exact)
    sol = solve_with_ineq_row(A, u, v, w, exact=exact)
    if sol.status != "optimal":
        return RatioCircuitResult(None, None, None, None, "unbounded", sol.pivots)
    z = sol.z_plus - sol.z_minus
    if not exact:
        top = np.abs(z).max() if z.size else 0.0
        z[np.abs(z) <= SNAP_REL * top] = 0.0
        if _row_value(z, v, w) <= NOISE_ROW:
            z[:] = 0.0  # rounding residue of a zero optimum
    lam = sol.lam
    if not exact:
        lam = max(float(lam), 0.0) + 0.0
    return RatioCircuitResult(z, sol.y, sol.s, lam, "optimal", sol.pivots)


def aug_max(x, z, exact: Optional[bool] = None):
    """Maximal step ``x + alpha z`` staying nonnegative. Returns ``(x', alpha)``."""
    exact = nm.is_exact(x) if exact is None else exact
    neg = [i for i in range(len(z)) if z[i] < 0]
    if not neg:
        raise UnboundedStep("direction has no negative coordinate; step length is unbounded")
    j = min(neg, key=lambda i: x[i] / -z[i])
    alpha = x[j] / -z[j]
    if not exact:
        alpha = max(float(alpha), 0.0)
    xn = x + alpha * z
    xn[j] = nm.ZERO if exact else 0.0
    if not exact:
        scale = max(1.0, float(np.abs(x).max()))
        xn[np.abs(xn) <= 1e-12 * scale] = 0.0
        xn[xn < 0] = 0.0
    return xn, alpha


def wallacher_weights(x):
    """``v = 0`` and ``w = 1/x`` with ``w_i = inf`` where ``x_i = 0``."""
    n = len(x)
    if nm.is_exact(x):
        v = nm.zeros(n, True)
        w = np.empty(n, dtype=object)
        for i in range(n):
            w[i] = math.inf if x[i] == 0 else 1 / x[i]
        return v, w
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        w = np.where(x > 0, 1.0 / np.where(x > 0, x, 1.0), math.inf)
    return np.zeros(n), w


def is_terminal(res: RatioCircuitResult, objective, eps_term: float = EPS_TERM) -> bool:
    if res.is_zero:
        return True
    if isinstance(res.lam, float):
        return res.lam <= eps_term * (1.0 + abs(float(objective)))
    return res.lam == 0


def wallacher_step(inst: LpInstance, x, exact: Optional[bool] = None, eps_term: float = EPS_TERM):
    """One Wallacher step. Returns ``(x', result, alpha)``; ``alpha`` is None at optimality."""
    exact = nm.is_exact(x) if exact is None else exact
    A, _, c = inst.data(exact)
    v, w = wallacher_weights(x)
    res = ratio_circuit(A, c, v, w, exact=exact)
    if res.status != "optimal":
        raise UnboundedOracle("ratio-circuit LP unbounded: the instance is unbounded")
    if is_terminal(res, c.dot(x), eps_term):
        return x, res, None
    xn, alpha = aug_max(x, res.z, exact)
    return xn, res, alpha
