"""The implementable circuit augmentation algorithm: no oracle access to ``v*`` or ``x^m``.

Each round approximates the max central path, takes a fixed budget of
Wallacher steps, approximates again, guesses the polarized partition from the
two approximations and, when the guess is consistent, runs forced long steps
towards a target built from the lifting operator of ``diag(xhat0)^{-1} ker A``.
"""
from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np

from .. import numeric as nm
from ..lifting import LiftingError, LiftingOperator, SubspaceBasis, build_operator, project_and_lift, singular_subspace
from ..lp_model import LpInstance
from ..mcp.approx import mcp_weights
from .constants import FConstants
from .long_steps import run_long_steps
from .options import SolveOptions
from .walk import Walker

log = logging.getLogger(__name__)


def guess_partition(n: int, xhat0, xhat1, lam0, lam1):
    """Ratio windows for ``B~`` and ``N~``; ``consistent`` iff they partition ``[n]``."""
    if any(v <= 0 for v in xhat0) or any(v <= 0 for v in xhat1) or lam0 <= 0 or lam1 <= 0:
        return (), (), False
    rho = lam1 / lam0
    B, N = [], []
    for i in range(n):
        r = xhat1[i] / xhat0[i]
        if 1 / (16 * n) <= r <= 4 * n:
            B.append(i)
        if rho / (4 * n * n) <= r <= 16 * n * n * rho:
            N.append(i)
    consistent = not (set(B) & set(N)) and len(B) + len(N) == n
    return tuple(B), tuple(N), consistent


def choose_k(sigma, lam0, lam1, n: int) -> int:
    """``max{i : 4 n^2 lam0 / sigma_i < lam1}`` (0 if none); sigma is nonincreasing."""
    k = 0
    for i, s in enumerate(sigma, start=1):
        if s > 0 and 4 * n * n * lam0 / s < lam1:
            k = i
    return k


def tilde_operator(inst: LpInstance, xhat0, B, N) -> LiftingOperator:
    """Lifting operator of ``diag(xhat0)^{-1} ker A`` for the guessed partition."""
    basis = SubspaceBasis.kernel(nm.to_float(inst.A), nm.to_float(xhat0))
    return build_operator(basis, B, N)


def build_targets(inst: LpInstance, xhat0, xbar, B, N, k: int, sigma_k, op: LiftingOperator):
    """``(Delta x, y0)``; ``y0`` is None when no admissible step length exists."""
    n = inst.n
    B, N = list(B), list(N)
    xh = np.asarray(nm.to_float(xhat0), dtype=float)
    xb = np.asarray(nm.to_float(xbar), dtype=float)
    d = op.dim - k
    Vd = singular_subspace(op, d, check=False)
    proj, lift = project_and_lift(op, Vd, -xb[N] / xh[N], strict=False)
    dx = np.zeros(n)
    dx[N] = xh[N] * proj
    dx[B] = xh[B] * lift
    floor = np.zeros(n)
    if k > 0:
        floor[N] = 8 * n * n * xh[N] / float(sigma_k)
    lo, hi = 0.0, math.inf
    for i in range(n):
        slack = xb[i] - floor[i]
        if dx[i] < 0:
            hi = min(hi, slack / -dx[i])
        elif dx[i] > 0:
            lo = max(lo, -slack / dx[i])
        elif slack < 0:
            return dx, None
    if lo > hi:
        return dx, None
    if hi == math.inf:
        # a nonzero kernel direction that never leaves the orthant would be a ray
        return dx, (xb.copy() if not dx.any() else None)
    return dx, xb + hi * dx


def _approx(walker: Walker, first: Optional = None):
    """``lambda`` plus the max central path estimate at the current point (n + 1 calls)."""
    res = walker.wallacher_call() if first is None else first
    if walker.terminal(res):
        return res, None, None
    v, w = mcp_weights(walker.x, res.s, res.lam)
    n = walker.n
    xhat = nm.zeros(n, walker.exact)
    points = []
    for i in range(n):
        u = nm.zeros(n, walker.exact)
        u[i] = -nm.ONE if walker.exact else -1.0
        r = walker.call(u, v, w)
        p = walker.x + r.z
        if not walker.exact:
            p = np.maximum(p, 0.0)
        points.append(p)
        xhat[i] = p[i]
    xbar = sum(points[1:], points[0].copy()) / n
    return res, xhat, xbar


def solve_full(inst: LpInstance, x0, opts: Optional[SolveOptions] = None):
    """Returns ``(FeasiblePoint, WalkTrace)``; one ``none`` step per round carries its diagnostics."""
    opts = opts or SolveOptions(rule="full")
    walker = Walker(inst, x0, opts)
    n = inst.n
    consts = FConstants.for_n(n)
    consts.check_budget()
    short = consts.short_steps if opts.short_steps is None else opts.short_steps
    rnd = 0
    while True:
        start_calls = walker.trace.oracle_calls
        diag = {"round": rnd, "complete": False}
        res0, xhat0, _ = _approx(walker)
        if xhat0 is None:
            diag.update({"short": 0, "calls": walker.trace.oracle_calls - start_calls})
            walker.note(diag)
            break
        done = False
        taken = 0
        for _ in range(short):
            res = walker.wallacher_call()
            taken += 1
            if walker.terminal(res):
                done = True
                break
            walker.augment("wallacher", res)
        diag["short"] = taken
        if done:
            diag["calls"] = walker.trace.oracle_calls - start_calls
            walker.note(diag)
            break
        res1, xhat1, xbar = _approx(walker)
        if xhat1 is None:
            diag["calls"] = walker.trace.oracle_calls - start_calls
            walker.note(diag)
            break
        lam0, lam1 = res0.lam, res1.lam
        B, N, consistent = guess_partition(n, xhat0, xhat1, lam0, lam1)
        diag.update({"complete": True, "lambda0": float(lam0), "lambda1": float(lam1),
                     "B": list(B), "N": list(N), "consistent": consistent, "k": None, "long": 0})
        if opts.trace_level == "full":
            diag["xhat0"] = [float(v) for v in xhat0]
            diag["xhat1"] = [float(v) for v in xhat1]
        if consistent and N:
            try:
                op = tilde_operator(inst, xhat0, B, N)
            except LiftingError as exc:
                log.debug("round %d: lifting failed (%s)", rnd, exc)
                op = None
            if op is not None and op.dim:
                k = choose_k(op.singular_values, float(lam0), float(lam1), n)
                diag.update({"k": k, "dim": op.dim, "sigma_head": [float(s) for s in op.singular_values[:4]]})
                if k < op.dim:
                    dx, y0 = build_targets(inst, xhat0, xbar, B, N, k, op.sigma(k), op)
                    diag["y0"] = y0 is not None
                    if y0 is not None:
                        y0 = nm.to_exact(y0) if walker.exact else y0
                        xb = xbar if walker.exact else np.asarray(nm.to_float(xbar), dtype=float)
                        if any(a != b for a, b in zip(xb, y0)):
                            recs = run_long_steps(walker, xb, y0, N, diag={"round": rnd, "k": k})
                            diag["long"] = len(recs)
                            diag["S_sizes"] = [len(r.S_before) for r in recs]
        diag["calls"] = walker.trace.oracle_calls - start_calls
        walker.note(diag)
        rnd += 1
    return walker.result()


def expected_round_calls(n: int, short: int, long: int) -> int:
    """Oracle calls of one complete round."""
    return (n + 1) + short + (n + 1) + long
