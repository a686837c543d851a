"""Greedy polarized decomposition of the max central path and the ideal potential."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import numeric as nm
from ..lifting import LiftingError, SubspaceBasis, build_operator, count_sigma
from .oracles import McpOracle
from .piecewise import PiecewiseLinear, slc


class DecompositionError(ArithmeticError):
    pass


@dataclass
class PolarizedDecomposition:
    breakpoints: list  # g_0 = 0 < g_1 < ... < g_r
    partitions: list  # (B, N) for [g_j, g_{j+1}], j = 0..r-1
    gamma: object
    slc_upper_sum: Optional[int] = None

    @property
    def r(self) -> int:
        return len(self.partitions)

    def interval_of(self, g) -> int:
        """``a = max{j : g_j < g}``; requires ``0 < g <= g_r``."""
        if g <= 0 or g > self.breakpoints[-1]:
            raise ValueError(f"gap {g} outside (0, {self.breakpoints[-1]}]")
        a = 0
        for j, gj in enumerate(self.breakpoints[:-1]):
            if gj < g:
                a = j
        return a

    @property
    def bound_ratio(self) -> Optional[float]:
        """Observed ``r / (2 sum SLC upper)``; at most 1 when the bound is met."""
        if not self.slc_upper_sum:
            return None
        return self.r / (2 * self.slc_upper_sum)


def _first_reaching(cv: PiecewiseLinear, target, hi):
    """Smallest ``t`` in ``[lo, hi]`` with ``cv(t) >= target`` (cv nondecreasing)."""
    if cv(cv.lo) >= target:
        return cv.lo
    xs = [x for x in cv.xs if x < hi] + [hi]
    prev = xs[0]
    for x in xs[1:]:
        vx = cv(x)
        if vx >= target:
            vp = cv(prev)
            return prev + (target - vp) * (x - prev) / (vx - vp)
        prev = x
    return hi


def _upper_crossing(cv: PiecewiseLinear, K, hi, tol):
    """Smallest ``t0`` with ``cv(t) <= K t`` for all ``t`` in ``[t0, hi]``."""
    pts = [x for x in cv.xs if x < hi] + [hi]
    h = [cv(t) - K * t for t in pts]
    for k in range(len(pts) - 1, -1, -1):
        if h[k] > tol:
            if k == len(pts) - 1:
                return hi
            t1, t2, h1, h2 = pts[k], pts[k + 1], h[k], h[k + 1]
            return t1 + h1 * (t2 - t1) / (h1 - h2)
    return pts[0]


def polarized_decomposition(oracle: McpOracle, g=None, gamma=None, eta=None) -> PolarizedDecomposition:
    """Cover ``[0, g]`` top-down by maximal ``gamma``-polarized intervals.

    Both interesting inequalities of the polarization condition bind at the
    lower end of an interval (monotonicity and concavity of ``x^m``), so each
    coordinate admits a least feasible lower end and the interval extends to
    the largest of these.
    """
    exact = oracle.exact
    cast = nm._q if exact else float
    g = oracle.g_max if g is None else cast(g)
    gamma = cast(nm.Q(1, 4) if gamma is None and exact else (0.25 if gamma is None else gamma))
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    tol = 0 if exact else 1e-12
    n = oracle.n
    hi = g
    bps, parts = [g], []
    while hi > 0:
        xh = oracle.xm(hi)
        lows = []
        for i, cv in enumerate(oracle.curves):
            b_i = _first_reaching(cv, gamma * xh[i], hi)
            n_i = _upper_crossing(cv, xh[i] / (gamma * hi), hi, 0 if exact else tol * (1 + abs(float(xh[i]))))
            lows.append(min(b_i, n_i))
        lo = max(lows)
        if lo >= hi:
            raise DecompositionError(f"no {gamma}-polarized interval ends at g={hi}")
        xl = oracle.xm(lo)
        slack = [0 if exact else tol * abs(float(v)) for v in xh]
        B = tuple(i for i in range(n) if xl[i] >= gamma * xh[i] - slack[i])
        N = tuple(i for i in range(n) if i not in B)
        parts.append((B, N))
        bps.append(lo)
        hi = lo
        if len(parts) > 10000:
            raise DecompositionError("decomposition did not terminate")
    bps.reverse()
    parts.reverse()
    dec = PolarizedDecomposition(bps, parts, gamma)
    slc_eta = 2 * gamma if eta is None else cast(eta)
    if slc_eta <= 1:
        dec.slc_upper_sum = sum(slc(cv.restrict(cv.lo, g) if g < cv.hi else cv, slc_eta, g)[1]
                                for cv in oracle.curves)
    return dec


def check_polarized(oracle: McpOracle, dec: PolarizedDecomposition, rel: float = 0.0) -> list:
    """Violations of the polarization inequalities at every breakpoint inside each interval."""

    def le(a, b):
        return a <= b if rel == 0 else float(a) <= float(b) * (1 + rel) + rel

    out = []
    kinks = oracle.breakpoints()
    gamma = dec.gamma
    for j, (B, N) in enumerate(dec.partitions):
        lo, hi = dec.breakpoints[j], dec.breakpoints[j + 1]
        xh = oracle.xm(hi)
        for t in [lo] + [k for k in kinks if lo < k < hi] + [hi]:
            xt = oracle.xm(t)
            for i in B:
                if not (le(gamma * xh[i], xt[i]) and le(xt[i], xh[i])):
                    out.append((j, float(t), i, "B"))
            for i in N:
                if not (le(t * xh[i], hi * xt[i]) and le(hi * gamma * xt[i], t * xh[i])):
                    out.append((j, float(t), i, "N"))
    return out


# -- ideal potential ------------------------------------------------------------

def build_h(oracle: McpOracle, dec: PolarizedDecomposition, eta=None) -> list:
    """Values ``h(g_j)``: ``h(g_r) = (eta/2) x^m(g_r)``, constant on B, scaling on N downward."""
    exact = oracle.exact
    eta = (nm.Q(1, 2) if exact else 0.5) if eta is None else eta
    g = dec.breakpoints
    r = dec.r
    H = [None] * (r + 1)
    H[r] = oracle.xm(g[r]) * eta / 2
    for j in range(r - 1, -1, -1):
        B, N = dec.partitions[j]
        hj = H[j + 1].copy()
        for i in N:
            hj[i] = H[j + 1][i] * g[j] / g[j + 1]
        H[j] = hj
    return H


def h_at(dec: PolarizedDecomposition, H: list, mu):
    """Evaluate the piecewise ``h`` at ``mu`` using the interval rules."""
    if mu == 0:
        return H[0]
    a = dec.interval_of(mu)
    B, N = dec.partitions[a]
    out = H[a + 1].copy()
    for i in N:
        out[i] = H[a + 1][i] * mu / dec.breakpoints[a + 1]
    return out


def check_h(oracle: McpOracle, dec: PolarizedDecomposition, H: list, eta=None) -> list:
    """Intervals where ``x^m >= h >= (eta/2) x^m`` fails at a sampled gap (diagnostic only)."""
    eta = (nm.Q(1, 2) if oracle.exact else 0.5) if eta is None else eta
    bad = []
    kinks = oracle.breakpoints()
    for j in range(dec.r):
        lo, hi = dec.breakpoints[j], dec.breakpoints[j + 1]
        for t in [k for k in kinks if lo < k < hi] + [hi]:
            xm, h = oracle.xm(t), h_at(dec, H, t)
            if any(h[i] > xm[i] or h[i] < eta / 2 * xm[i] for i in range(oracle.n)):
                bad.append(j)
                break
    return bad


class IdealPotential:
    """``Phi^id(g)`` for a fixed decomposition; lifting operators are cached per interval."""

    def __init__(self, inst, dec: PolarizedDecomposition, H: list):
        self.A = nm.to_float(inst.A)
        self.dec = dec
        self.H = H
        self._ops = {}
        self._prefix = [1]
        for i in range(1, dec.r):
            Nprev, Ncur = set(dec.partitions[i - 1][1]), set(dec.partitions[i][1])
            self._prefix.append(self._prefix[-1] + len(Nprev ^ Ncur) + 1)

    def operator(self, a: int):
        if a not in self._ops:
            h = nm.to_float(self.H[a + 1])
            keep = np.flatnonzero(h > 0)
            N = [k for k, i in enumerate(keep) if i in set(self.dec.partitions[a][1])]
            B = [k for k in range(keep.size) if k not in set(N)]
            try:
                basis = SubspaceBasis.kernel(self.A[:, keep], h[keep])
                self._ops[a] = build_operator(basis, B, N) if N else None
            except LiftingError:
                self._ops[a] = None
        return self._ops[a]

    def __call__(self, g) -> int:
        if g <= 0:
            return 0
        a = self.dec.interval_of(g)
        op = self.operator(a)
        count = 0
        if op is not None and op.dim:
            count = count_sigma(op, float(self.dec.breakpoints[a + 1]) / float(g))
        return self._prefix[a] + count


def ideal_potential(inst, dec: PolarizedDecomposition, H: list, g) -> int:
    return IdealPotential(inst, dec, H)(g)
