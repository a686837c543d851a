"""Dense two-phase primal simplex producing basic optimal solutions with duals.

Works in float64 or, with ``exact=True``, in rational arithmetic over object
arrays. Dantzig pricing is used until ``5*(n+m)`` degenerate pivots have been
made, after which Bland's rule takes over for the rest of the solve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from . import numeric as nm
from .lp_model import LpInstance

EPS_OPT = 1e-8
EPS_COND = 1e-12
EPS_FEAS = 1e-9
_PIV_TOL = 1e-11


class NumericalBreakdown(ArithmeticError):
    """Basis too ill-conditioned, or the pivot budget ran out."""


@dataclass
class LpSolution:
    status: str  # optimal | unbounded | infeasible
    x: Optional[np.ndarray]
    basis: tuple
    y: Optional[np.ndarray]
    reduced_costs: Optional[np.ndarray]
    objective: object
    ray: Optional[np.ndarray] = None
    pivots: int = 0
    kept_rows: tuple = ()

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _finite_mask(v) -> np.ndarray:
    return np.array([not (isinstance(e, float) and math.isinf(e)) for e in v], dtype=bool)


class SimplexSolver:
    """One solve per object; owns its tableau workspace."""

    def __init__(self, A, b, c, exact: bool = False, bland: bool = False):
        self.exact = exact
        if exact:
            self.A, self.b, self.c = nm.to_exact(A), nm.to_exact(b), nm.to_exact(c)
        else:
            self.A = np.array(A, dtype=float)
            self.b = np.array(b, dtype=float)
            self.c = np.array(c, dtype=float)
        self.m, self.n = self.A.shape
        self.force_bland = bland
        self.degenerate = 0
        self.pivots = 0
        self.used = False

    # -- helpers
    def _tol(self, scale=1.0):
        return 0.0 if self.exact else _PIV_TOL * scale

    def _run(self, T, basis, ncols):
        """Iterate on tableau ``T`` (last row = reduced costs, last column = rhs)."""
        m = T.shape[0] - 1
        rhs = T.shape[1] - 1
        limit = 50 * (ncols + m) + 1000
        cost_tol = 0.0 if self.exact else 1e-10 * max(1.0, float(np.abs(T[m, :ncols]).max()) if ncols else 1.0)
        bland_after = 5 * (self.n + self.m)
        basis_arr = np.array(basis, dtype=np.int64)
        while True:
            bland = self.force_bland or self.degenerate > bland_after
            j = _kernels.entering(T[m], ncols, cost_tol, bland)
            if j < 0:
                return "optimal", None
            i = _kernels.ratio(T, j, rhs, basis_arr, self._tol())
            if i < 0:
                return "unbounded", j
            if T[i, rhs] == 0 or (not self.exact and abs(T[i, rhs]) <= 1e-14):
                self.degenerate += 1
            _kernels.pivot(T, i, j)
            basis[i] = j
            basis_arr[i] = j
            self.pivots += 1
            if self.pivots > limit:
                raise NumericalBreakdown("pivot limit exceeded")

    def _tableau(self, A, b, basis, cost):
        """Tableau for a given basis of [A | b]."""
        m = A.shape[0]
        B = A[:, basis]
        inv_ab = nm.solve(B, np.concatenate([A, b[:, None]], axis=1))
        T = np.concatenate([inv_ab, np.zeros((1, A.shape[1] + 1), dtype=A.dtype)], axis=0)
        if self.exact:
            T[m] = nm.to_exact(T[m])
        cb = cost[list(basis)]
        T[m, :-1] = cost - cb.dot(inv_ab[:, :-1])
        T[m, -1] = -cb.dot(inv_ab[:, -1])
        return T

    def solve(self) -> LpSolution:
        if self.used:
            raise RuntimeError("SimplexSolver objects are single-use")
        self.used = True
        m, n = self.m, self.n
        A, b = self.A.copy(), self.b.copy()
        if not self.exact:
            scale = np.abs(A).max(axis=1) if n else np.ones(m)
            scale[scale == 0] = 1.0
            A /= scale[:, None]
            b /= scale
        flip = b < 0
        A[flip] = -A[flip]
        b[flip] = -b[flip]

        # phase 1 on [A | I | b]
        ident = nm.to_exact(np.eye(m)) if self.exact else np.eye(m)
        T = np.concatenate([A, ident, b[:, None]], axis=1)
        cost_row = -T.sum(axis=0)
        cost_row[n:n + m] = 0
        T = np.concatenate([T, cost_row[None, :]], axis=0)
        basis = list(range(n, n + m))
        status, _ = self._run(T, basis, n + m)
        infeas = -T[m, -1]
        bscale = 1.0 if self.exact else max(1.0, float(np.abs(b).max()) if m else 1.0)
        if infeas > (0 if self.exact else EPS_FEAS * bscale):
            return LpSolution("infeasible", None, (), None, None, None, pivots=self.pivots)

        # drive artificials out, dropping redundant rows
        keep = list(range(m))
        for i in range(m):
            if basis[i] >= n:
                row = np.array([abs(v) for v in T[i, :n]]) if self.exact else np.abs(T[i, :n])
                j = int(np.argmax(row)) if n else -1
                if n and row[j] > self._tol(1e2):
                    _kernels.pivot(T, i, j)
                    basis[i] = j
                    self.pivots += 1
                else:
                    keep.remove(i)
        T = np.concatenate([T[keep][:, :n], T[keep][:, -1:]], axis=1)
        basis = [basis[i] for i in keep]
        self.kept_rows = tuple(keep)

        # phase 2
        mk = len(keep)
        cost = np.concatenate([self.c, nm.zeros(1, self.exact)])
        cb = self.c[basis]
        cost_row = cost - cb.dot(T[:, :])
        cost_row[-1] = -cb.dot(T[:, -1])
        T = np.concatenate([T, cost_row[None, :]], axis=0)
        A_kept, b_kept = self.A[keep], self.b[keep]
        for attempt in range(4):
            status, j = self._run(T, basis, n)
            if status == "unbounded":
                ray = nm.zeros(n, self.exact)
                ray[j] = nm.ONE if self.exact else 1.0
                for i, bi in enumerate(basis):
                    ray[bi] = -T[i, j]
                return LpSolution("unbounded", None, tuple(basis), None, None, None, ray=ray,
                                  pivots=self.pivots, kept_rows=self.kept_rows)
            sol = self._finish(A_kept, b_kept, basis)
            if self.exact or sol is not None:
                return sol
            # refactor from the current basis and resume
            T = self._tableau(A_kept, b_kept, basis, self.c)
        raise NumericalBreakdown("simplex failed to converge after refactorization")

    def _finish(self, A_kept, b_kept, basis):
        n = self.n
        B = A_kept[:, basis]
        if not self.exact:
            cs = np.abs(B).max(axis=0)
            cs[cs == 0] = 1.0
            rs = np.abs(B).max(axis=1)
            rs[rs == 0] = 1.0
            cond = np.linalg.cond((B / cs) / rs[:, None]) if B.size else 1.0
            if not np.isfinite(cond) or cond > 1.0 / EPS_COND:
                raise NumericalBreakdown(f"basis condition estimate {cond:.3g} exceeds 1/eps_cond")
        xb = nm.solve(B, b_kept) if B.size else nm.zeros(0, self.exact)
        yk = nm.solve(B.T, self.c[basis]) if B.size else nm.zeros(0, self.exact)
        x = nm.zeros(n, self.exact)
        for i, bi in enumerate(basis):
            x[bi] = xb[i]
        y = nm.zeros(self.m, self.exact)
        for i, r in enumerate(self.kept_rows):
            y[r] = yk[i]
        red = self.c - self.A.T.dot(y)
        if not self.exact:
            bscale = max(1.0, float(np.abs(b_kept).max()) if b_kept.size else 1.0)
            cscale = max(1.0, float(np.abs(self.c).max()) if n else 1.0)
            if xb.size and xb.min() < -EPS_FEAS * bscale:
                return None
            if n and red.min() < -EPS_OPT * cscale:
                return None
            x[x < 0] = 0.0
        obj = self.c.dot(x)
        return LpSolution("optimal", x, tuple(basis), y, red, obj, pivots=self.pivots,
                          kept_rows=self.kept_rows)


def solve_standard(A, b, c, exact: bool = False, bland: bool = False) -> LpSolution:
    return SimplexSolver(A, b, c, exact=exact, bland=bland).solve()


def solve(inst: LpInstance, exact: bool = False, bland: bool = False) -> LpSolution:
    A, b, c = inst.data(exact)
    return solve_standard(A, b, c, exact=exact, bland=bland)


@dataclass
class SplitSolution:
    status: str
    z_plus: Optional[np.ndarray]
    z_minus: Optional[np.ndarray]
    y: Optional[np.ndarray]
    lam: object
    s: Optional[np.ndarray]
    objective: object
    pivots: int = 0


def solve_with_ineq_row(A, u, v_plus, w_minus, exact: bool = False, bland: bool = False) -> SplitSolution:
    """Solve ``min <u,z+> - <u,z->`` s.t. ``Az+ - Az- = 0``, ``<v,z+> + <w,z-> <= 1``.

    Variables whose weight is infinite are fixed to zero and removed.
    ``A`` may be an ``LpInstance``.
    """
    if isinstance(A, LpInstance):
        A = A.data(exact)[0]
    A = nm.to_exact(A) if exact else np.asarray(A, dtype=float)
    m, n = A.shape
    fp, fm = _finite_mask(v_plus), _finite_mask(w_minus)
    conv = nm.to_exact if exact else (lambda a: np.asarray(a, dtype=float))
    u = conv(u)
    vp = conv([v_plus[i] for i in range(n) if fp[i]])
    wm = conv([w_minus[i] for i in range(n) if fm[i]])
    ip, im = np.flatnonzero(fp), np.flatnonzero(fm)
    zero_col = nm.zeros((m, 1), exact) if exact else np.zeros((m, 1))
    if exact:
        zero_col = zero_col.reshape(m, 1)
    top = np.concatenate([A[:, ip], -A[:, im], zero_col], axis=1)
    one = nm.to_exact([1]) if exact else np.ones(1)
    bottom = np.concatenate([vp, wm, one])[None, :]
    M = np.concatenate([top, bottom], axis=0)
    rhs = np.concatenate([nm.zeros(m, exact), one])
    cost = np.concatenate([u[ip], -u[im], nm.zeros(1, exact)])
    sol = solve_standard(M, rhs, cost, exact=exact, bland=bland)
    if sol.status != "optimal":
        return SplitSolution(sol.status, None, None, None, None, None, None, sol.pivots)
    zp, zm = nm.zeros(n, exact), nm.zeros(n, exact)
    k = len(ip)
    zp[ip] = sol.x[:k]
    zm[im] = sol.x[k:k + len(im)]
    y = sol.y[:m]
    lam = -sol.y[m]
    s = u - A.T.dot(y)
    return SplitSolution("optimal", zp, zm, y, lam, s, sol.objective, sol.pivots)
