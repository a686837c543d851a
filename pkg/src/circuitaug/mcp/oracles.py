"""Exact max central path oracles: per-coordinate LPs and parametric sweeps.

The primal curve is ``x^m_i(g) = max{x_i : Ax = b, x >= 0, <c,x> <= v* + g}``
and the dual curve is ``s^m_i(g) = max{s_i : A^T y + s = c, s >= 0, <b,y> >= v* - g}``.
Both are value functions of an LP whose right-hand side is affine in ``g``,
so an optimal basis stays optimal on an interval and gives one exact linear
piece; sweeping bases covers ``[0, G]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import numeric as nm
from ..lp_kernel import solve as kernel_solve, solve_standard
from ..lp_model import LpInstance
from .piecewise import PiecewiseLinear

EXACT_MAX_N = 12


class OracleError(ArithmeticError):
    pass


def optimal_value(inst: LpInstance, exact: Optional[bool] = None):
    """``v*`` from the kernel (rational when ``n <= 12`` by default)."""
    exact = inst.n <= EXACT_MAX_N if exact is None else exact
    sol = kernel_solve(inst, exact=exact)
    if sol.status != "optimal":
        raise OracleError(f"instance is {sol.status}")
    return sol.objective


def _cast(v, exact):
    return nm._q(v) if exact else float(v)


# -- standard-form encodings ------------------------------------------------------

def _primal_system(inst: LpInstance, exact: bool, v_star):
    """``[A 0; c 1] (x, t) = (b, v*) + g (0, 1)``."""
    A, b, c = inst.data(exact)
    m, n = A.shape
    zc = nm.zeros((m, 1), exact) if not exact else nm.to_exact(np.zeros((m, 1)))
    one = nm.to_exact([[1]]) if exact else np.ones((1, 1))
    M = np.concatenate([np.concatenate([A, zc], axis=1), np.concatenate([c[None, :], one], axis=1)])
    b0 = np.concatenate([b, nm.to_exact([v_star]) if exact else np.array([float(v_star)])])
    e = nm.zeros(m + 1, exact)
    e[m] = nm.ONE if exact else 1.0
    return M, b0, e


def _dual_system(inst: LpInstance, exact: bool, v_star):
    """Variables ``(y+, y-, s, t)``: ``A^T y + s = c``, ``-<b,y> + t = g - v*``."""
    A, b, c = inst.data(exact)
    m, n = A.shape
    eye = nm.to_exact(np.eye(n)) if exact else np.eye(n)
    zn = nm.to_exact(np.zeros((n, 1))) if exact else np.zeros((n, 1))
    top = np.concatenate([A.T, -A.T, eye, zn], axis=1)
    zr = nm.to_exact(np.zeros((1, n))) if exact else np.zeros((1, n))
    one = nm.to_exact([[1]]) if exact else np.ones((1, 1))
    bot = np.concatenate([-b[None, :], b[None, :], zr, one], axis=1)
    M = np.concatenate([top, bot])
    b0 = np.concatenate([c, nm.to_exact([-v_star]) if exact else np.array([-float(v_star)])])
    e = nm.zeros(n + 1, exact)
    e[n] = nm.ONE if exact else 1.0
    return M, b0, e


def _primal_cost(n, i, exact):
    cost = nm.zeros(n + 1, exact)
    cost[i] = -nm.ONE if exact else -1.0
    return cost


def _dual_cost(m, n, i, A_row, exact):
    """Minimise ``<a_i, y>`` so that ``s_i = c_i - <a_i, y>`` is maximised."""
    cost = nm.zeros(2 * m + n + 1, exact)
    cost[:m] = A_row
    cost[m:2 * m] = -A_row
    return cost


# -- parametric sweep ------------------------------------------------------------

def _piece(M, b0, e, cost, basis, exact):
    """Validity range and linear value ``p + q g`` of an optimal basis."""
    B = M[:, list(basis)]
    pq = nm.solve(B, np.stack([b0, e], axis=1))
    p_vec, q_vec = pq[:, 0], pq[:, 1]
    cb = cost[list(basis)]
    lo, hi = -math.inf, math.inf
    for pj, qj in zip(p_vec, q_vec):
        if exact:
            if qj > 0:
                lo = max(lo, -pj / qj)
            elif qj < 0:
                hi = min(hi, -pj / qj)
            elif pj < 0:
                return None
        else:
            if abs(qj) <= 1e-13 * (1 + abs(pj)):
                if pj < -1e-9:
                    return None
            elif qj > 0:
                lo = max(lo, -pj / qj)
            else:
                hi = min(hi, -pj / qj)
    return lo, hi, cb.dot(q_vec), cb.dot(p_vec)


def parametric_value(M, b0, e, cost, a, b, exact: bool, max_solves: int = 400) -> PiecewiseLinear:
    """Value function ``g -> min{<cost,x> : Mx = b0 + g e, x >= 0}`` on ``[a, b]`` (negated: max)."""
    pieces = []
    todo = [(a, b)]
    solves = 0
    while todo:
        lo, hi = todo.pop()
        probes = [lo + (hi - lo) / 2, lo + (hi - lo) / 3, lo + 2 * (hi - lo) / 3, lo, hi] if hi > lo else [lo]
        got = None
        for g in probes:
            sol = solve_standard(M, b0 + g * e, cost, exact=exact)
            solves += 1
            if solves > max_solves:
                raise OracleError("parametric sweep exceeded its solve budget")
            if sol.status != "optimal":
                raise OracleError(f"sweep LP {sol.status} at g={g}")
            if len(sol.basis) != M.shape[0]:
                raise OracleError("sweep system lost full row rank")
            rng = _piece(M, b0, e, cost, sol.basis, exact)
            if rng is None:
                continue
            plo, phi, q, p = rng
            plo, phi = max(plo, lo), min(phi, hi)
            if phi > plo or hi == lo:
                got = (plo, phi, -q, -p)
                break
        if got is None:
            raise OracleError(f"no basis with positive-width range on [{lo}, {hi}]")
        pieces.append(got)
        if got[0] > lo:
            todo.append((lo, got[0]))
        if got[1] < hi:
            todo.append((got[1], hi))
    if a == b:
        _, _, q, p = pieces[0]
        return PiecewiseLinear((a,), (p + q * a,))
    return PiecewiseLinear.from_pieces(pieces)


# -- samples -----------------------------------------------------------------------

@dataclass
class McpSample:
    g: object
    xm: np.ndarray
    xm_feasible: np.ndarray
    witnesses: list = field(default_factory=list)


def exact_mcp(inst: LpInstance, g, v_star=None, exact: Optional[bool] = None) -> McpSample:
    """``x^m(g)`` with one argmax witness per coordinate; the average is feasible."""
    exact = inst.n <= EXACT_MAX_N if exact is None else exact
    if v_star is None:
        v_star = optimal_value(inst, exact)
    g = _cast(g, exact)
    if g < 0:
        raise ValueError("gap must be nonnegative")
    M, b0, e = _primal_system(inst, exact, _cast(v_star, exact))
    n = inst.n
    xm = nm.zeros(n, exact)
    wit = []
    for i in range(n):
        sol = solve_standard(M, b0 + g * e, _primal_cost(n, i, exact), exact=exact)
        if sol.status != "optimal":
            raise OracleError(f"coordinate LP {i} is {sol.status}")
        xm[i] = sol.x[i]
        wit.append(sol.x[:n])
    avg = sum(wit[1:], wit[0].copy()) / n
    return McpSample(g, xm, avg, wit)


def exact_dual_mcp(inst: LpInstance, g, v_star=None, exact: Optional[bool] = None) -> np.ndarray:
    """``s^m(g)``; unbounded coordinates (variables fixed at zero) are reported as ``inf``."""
    exact = inst.n <= EXACT_MAX_N if exact is None else exact
    if v_star is None:
        v_star = optimal_value(inst, exact)
    g = _cast(g, exact)
    M, b0, e = _dual_system(inst, exact, _cast(v_star, exact))
    A, _, c = inst.data(exact)
    m, n = A.shape
    out = np.empty(n, dtype=object if exact else float)
    for i in range(n):
        sol = solve_standard(M, b0 + g * e, _dual_cost(m, n, i, A[:, i], exact), exact=exact)
        if sol.status == "unbounded":
            out[i] = math.inf
        elif sol.status != "optimal":
            raise OracleError(f"dual coordinate LP {i} is {sol.status}")
        else:
            out[i] = c[i] - sol.objective
    return out


def fixed_zero_variables(inst: LpInstance, exact: Optional[bool] = None) -> list:
    """Coordinates that vanish on the whole feasible region (detected, not eliminated)."""
    exact = inst.n <= EXACT_MAX_N if exact is None else exact
    A, b, _ = inst.data(exact)
    out = []
    for i in range(inst.n):
        cost = nm.zeros(inst.n, exact)
        cost[i] = -nm.ONE if exact else -1.0
        sol = solve_standard(A, b, cost, exact=exact)
        if sol.status == "optimal" and sol.objective >= (0 if exact else -1e-12):
            out.append(i)
    return out


class McpOracle:
    """Exact max central path of ``inst`` on ``[0, g_max]`` as piecewise-linear curves."""

    def __init__(self, inst: LpInstance, g_max, exact: Optional[bool] = None, v_star=None):
        self.inst = inst
        self.exact = inst.n <= EXACT_MAX_N if exact is None else exact
        self.v_star = optimal_value(inst, self.exact) if v_star is None else _cast(v_star, self.exact)
        self.g_max = _cast(g_max, self.exact)
        M, b0, e = _primal_system(inst, self.exact, self.v_star)
        zero = nm.ZERO if self.exact else 0.0
        self.curves = [parametric_value(M, b0, e, _primal_cost(inst.n, i, self.exact), zero, self.g_max, self.exact)
                       for i in range(inst.n)]
        self._dual = None

    @property
    def n(self) -> int:
        return self.inst.n

    def breakpoints(self) -> list:
        """Union of the kinks of all coordinate curves, sorted."""
        return sorted({k for cv in self.curves for k in cv.kinks()})

    def xm(self, g) -> np.ndarray:
        g = _cast(g, self.exact)
        out = nm.zeros(self.n, self.exact)
        for i, cv in enumerate(self.curves):
            out[i] = cv(g)
        return out

    def xm_feasible(self, g) -> np.ndarray:
        return exact_mcp(self.inst, g, self.v_star, self.exact).xm_feasible

    def gap(self, x):
        A, b, c = self.inst.data(self.exact)
        x = nm.to_exact(x) if self.exact else np.asarray(nm.to_float(x), dtype=float)
        return c.dot(x) - self.v_star

    def dual_curves(self) -> list:
        """``s^m_i`` on ``[0, g_max]``; None for coordinates with unbounded ``s^m_i``."""
        if self._dual is None:
            M, b0, e = _dual_system(self.inst, self.exact, self.v_star)
            A = self.inst.data(self.exact)[0]
            m, n = A.shape
            zero = nm.ZERO if self.exact else 0.0
            cv = []
            for i in range(n):
                try:
                    neg = parametric_value(M, b0, e, _dual_cost(m, n, i, A[:, i], self.exact),
                                           zero, self.g_max, self.exact)
                except OracleError:
                    cv.append(None)
                    continue
                c_i = self.inst.data(self.exact)[2][i]
                # parametric_value returns -min<a_i,y>, so s^m_i = c_i + value
                cv.append(PiecewiseLinear(neg.xs, tuple(c_i + y for y in neg.ys)))
            self._dual = cv
        return self._dual

    def sm(self, g) -> np.ndarray:
        g = _cast(g, self.exact)
        out = np.empty(self.n, dtype=object if self.exact else float)
        for i, cv in enumerate(self.dual_curves()):
            out[i] = math.inf if cv is None else cv(g)
        return out
