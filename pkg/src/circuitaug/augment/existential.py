"""Oracle-assisted circuit augmentation: knows ``v*``, ``x^m`` and a polarized decomposition."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .. import numeric as nm
from ..lifting import LiftingError, SubspaceBasis, build_operator, count_sigma
from ..lp_model import LpInstance
from ..mcp.oracles import McpOracle, exact_mcp
from ..mcp.polarized import PolarizedDecomposition
from .constants import FConstants, log_le
from .long_steps import run_long_steps
from .options import SolveOptions
from .walk import Walker


def _log(v) -> float:
    v = float(v)
    return math.log(v) if v > 0 else -math.inf


class _IntervalOps:
    """Lifting operator of ``diag(x^m(g_{j+1}))^{-1} ker A`` per interval, zero coordinates eliminated."""

    def __init__(self, inst, oracle: McpOracle, dec: PolarizedDecomposition):
        self.A = np.asarray(nm.to_float(inst.A), dtype=float)
        self.oracle, self.dec = oracle, dec
        self.cache = {}

    def get(self, j):
        if j not in self.cache:
            xm = np.asarray(nm.to_float(self.oracle.xm(self.dec.breakpoints[j + 1])), dtype=float)
            keep = np.flatnonzero(xm > 0)
            Nset = set(self.dec.partitions[j][1])
            N = [k for k, i in enumerate(keep) if i in Nset]
            B = [k for k in range(keep.size) if k not in set(N)]
            op = None
            if N:
                try:
                    op = build_operator(SubspaceBasis.kernel(self.A[:, keep], xm[keep]), B, N)
                except LiftingError:
                    op = None
            self.cache[j] = (op, xm)
        return self.cache[j]


class _Context:
    def __init__(self, inst, walker: Walker, dec: PolarizedDecomposition, oracle: McpOracle):
        self.inst, self.walker, self.dec, self.oracle = inst, walker, dec, oracle
        self.n = inst.n
        self.consts = FConstants.for_n(inst.n)
        self.ops = _IntervalOps(inst, oracle, dec)
        self.exact_gap = walker.exact and oracle.exact

    def cast(self, a):
        return nm.to_exact(a) if self.walker.exact else np.asarray(nm.to_float(a), dtype=float)

    def gap(self, x):
        g = self.oracle.gap(x)
        return g if self.exact_gap else float(g)


def _long_round(ctx: _Context) -> Optional[dict]:
    """Run Long-Steps when the current gap lies deep inside a long singular value subinterval."""
    walker, dec, oracle, consts, n = ctx.walker, ctx.dec, ctx.oracle, ctx.consts, ctx.n
    g = ctx.gap(walker.x)
    top = dec.breakpoints[-1]
    if g <= 0 or g > top * (1 if ctx.exact_gap else 1 + 1e-12):
        return None
    j = dec.interval_of(min(g, top))
    op, xm_hi = ctx.ops.get(j)
    if op is None or not op.dim:
        return None
    g_lo, g_hi = dec.breakpoints[j], dec.breakpoints[j + 1]
    k = count_sigma(op, float(g_hi) / float(g))
    g_hat = g_lo if k == 0 else max(float(g_lo), float(g_hi) / op.sigma(k))
    lg = _log(g)
    log_f1_ghat = consts.log_f1 + _log(g_hat)
    deep = (k < op.dim and log_f1_ghat < lg
            and log_le(lg, _log(g_hi) - consts.log_f2 - _log(op.sigma(k + 1))))
    if not deep:
        return None
    N = dec.partitions[j][1]
    xbar = ctx.cast(exact_mcp(ctx.inst, g, oracle.v_star, oracle.exact).xm_feasible)
    g_y = n * (nm._q(g_hat) if oracle.exact else float(g_hat))
    y0 = ctx.cast(exact_mcp(ctx.inst, g_y, oracle.v_star, oracle.exact).xm_feasible)
    info = {"interval": j, "k": k, "g": float(g), "g_hat": float(g_hat), "log_f1_ghat": log_f1_ghat,
            "N": list(N), "props": _properties(oracle, xbar, y0, g, g_hat, N, op.sigma(k), xm_hi, n),
            "steps": []}
    if all(a == b for a, b in zip(xbar, y0)):
        return info
    recs = run_long_steps(walker, xbar, y0, N,
                          guard=lambda: log_f1_ghat < _log(ctx.gap(walker.x)),
                          gap=ctx.gap, diag={"interval": j, "k": k})
    info["steps"] = [_record(r, log_f1_ghat) for r in recs]
    return info


def solve_existential(inst: LpInstance, x0, decomposition: PolarizedDecomposition, oracle: McpOracle,
                      opts: Optional[SolveOptions] = None):
    """Returns ``(FeasiblePoint, WalkTrace)``; ``trace.long_rounds`` holds the dichotomy data."""
    opts = opts or SolveOptions(rule="existential")
    walker = Walker(inst, x0, opts)
    ctx = _Context(inst, walker, decomposition, oracle)
    while True:
        info = _long_round(ctx)
        if info is not None and info["steps"]:
            walker.trace.long_rounds.append(info)
            walker.note({"existential_round": info})
        res = walker.wallacher_call()
        if walker.terminal(res):
            break
        walker.augment("wallacher", res)
    return walker.result()


def existential_long_steps(inst: LpInstance, x, decomposition: PolarizedDecomposition, oracle: McpOracle,
                           opts: Optional[SolveOptions] = None):
    """One instrumented Long-Steps call from an arbitrary feasible ``x`` (None if ``x`` is not deep)."""
    walker = Walker(inst, x, opts or SolveOptions(rule="existential"))
    info = _long_round(_Context(inst, walker, decomposition, oracle))
    fp, trace = walker.result()
    return fp, info, trace


def _record(r, log_f1_ghat) -> dict:
    return {"p": r.p, "S_before": list(r.S_before), "S_after": list(r.S_after), "grew": r.grew,
            "alpha": None if r.alpha is None else float(r.alpha),
            "gap_after": None if r.gap_after is None else float(r.gap_after),
            "exited": log_le(_log(r.gap_after), log_f1_ghat, 1e-6) if r.gap_after is not None else None}


def _properties(oracle, xbar, y0, g, g_hat, N, sigma_k, xm_hi, n) -> dict:
    """Properties (1), (2), (a), (b) with ``f5 = f6 = n``, evaluated directly."""
    xm_g = np.asarray(nm.to_float(oracle.xm(g)), dtype=float)
    xb, yv = np.asarray(nm.to_float(xbar), dtype=float), np.asarray(nm.to_float(y0), dtype=float)
    gf = float(g)
    tol = 1e-9
    N = list(N)
    scaled_y = yv[N] / np.where(xm_hi[N] > 0, xm_hi[N], 1.0)
    return {
        "x_gap": float(oracle.gap(xbar)) <= n * gf * (1 + tol) + tol,
        "x_lbound": bool(np.all(xb[N] >= xm_g[N] / n * (1 - tol))),
        "y_gap": float(oracle.gap(y0)) <= n * float(g_hat) * (1 + tol) + tol,
        "y_lbound": bool(np.all(scaled_y >= (1 - tol) / sigma_k)) if sigma_k != math.inf else True,
    }
