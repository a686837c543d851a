"""Oracle-free approximations of the gap and of the max central path."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import numeric as nm
from ..lp_model import LpInstance
from ..ratio_circuit import UnboundedOracle, ratio_circuit, wallacher_weights

NEG_WEIGHT_TOL = 1e-9


class WeightError(ArithmeticError):
    """Approximation weights came out negative beyond tolerance."""


@dataclass
class ApproxMcp:
    lam: object
    xhat: np.ndarray
    points: list
    xbar: np.ndarray
    s: np.ndarray
    y: np.ndarray


def approx_gap(inst: LpInstance, x, exact: Optional[bool] = None):
    """``(lambda, s, y)`` from the Wallacher ratio-circuit LP; ``g/n <= lambda <= g``."""
    exact = nm.is_exact(x) if exact is None else exact
    A, _, c = inst.data(exact)
    v, w = wallacher_weights(x)
    res = ratio_circuit(A, c, v, w, exact=exact)
    if res.status != "optimal":
        raise UnboundedOracle("ratio-circuit LP unbounded: the instance is unbounded")
    return res.lam, res.s, res.y


def _clamp(vals, scale, exact):
    if exact:
        if any(v < 0 for v in vals):
            raise WeightError("negative approximation weight")
        return vals
    tol = NEG_WEIGHT_TOL * scale
    if np.any(vals < -tol):
        raise WeightError(f"approximation weight {vals.min():.3g} is negative")
    return np.maximum(vals, 0.0)


def mcp_weights(x, s, lam):
    """``v = s/lambda`` and ``w = 2/x - s/lambda`` (``inf`` where ``x_i = 0``)."""
    exact = nm.is_exact(x)
    n = len(x)
    v = s / lam
    if exact:
        w = np.empty(n, dtype=object)
        for i in range(n):
            w[i] = math.inf if x[i] == 0 else 2 / x[i] - v[i]
        wf = np.array([wi for wi in w if not isinstance(wi, float)], dtype=object)
        _clamp(wf, 1.0, True)
        return _clamp(v, 1.0, True), w
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    pos = x > 0
    inv = np.where(pos, 1.0 / np.where(pos, x, 1.0), math.inf)
    scale = 1.0 + float(np.max(np.abs(v)))
    v = _clamp(v, scale, False)
    w = np.where(pos, 2.0 * inv - v, math.inf)
    if np.any(w[pos] < inv[pos] * (1 - 1e-9) - NEG_WEIGHT_TOL * scale):
        raise WeightError("2/x - s/lambda fell below 1/x")
    w[pos] = np.maximum(w[pos], 0.0)
    return v, w


def approx_mcp(inst: LpInstance, x, lam=None, s=None, y=None, exact: Optional[bool] = None) -> ApproxMcp:
    """Estimate ``x^m(g(x))`` with ``n`` ratio-circuit calls (one per coordinate).

    Returns ``xhat`` with ``x^m/(2n) <= xhat <= 2 x^m`` and the feasible average
    ``xbar`` of the ``n`` points ``x + z'``.
    """
    exact = nm.is_exact(x) if exact is None else exact
    if lam is None:
        lam, s, y = approx_gap(inst, x, exact)
    if lam == 0:
        raise ValueError("lambda is zero: x is optimal and the approximation is undefined")
    A = inst.data(exact)[0]
    n = inst.n
    v, w = mcp_weights(x, s, lam)
    xhat = nm.zeros(n, exact)
    points = []
    for i in range(n):
        u = nm.zeros(n, exact)
        u[i] = -nm.ONE if exact else -1.0
        res = ratio_circuit(A, u, v, w, exact=exact)
        if res.status != "optimal":
            raise UnboundedOracle("coordinate ratio-circuit LP unbounded")
        p = x + res.z
        if not exact:
            p = np.maximum(p, 0.0)
        points.append(p)
        xhat[i] = p[i]
    xbar = sum(points[1:], points[0].copy()) / n
    return ApproxMcp(lam, xhat, points, xbar, s, y)
