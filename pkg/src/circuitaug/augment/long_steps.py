"""Long steps along a moving target on the ray through ``y0`` and ``xbar``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import numeric as nm
from ..lp_model import LpInstance
from ..ratio_circuit import RatioCircuitResult, ratio_circuit
from .constants import FConstants
from .options import SolveOptions
from .walk import Walker


@dataclass
class LongStepState:
    p: int
    S_p: tuple
    y_p: np.ndarray
    origin: np.ndarray
    direction: np.ndarray
    t: object = 0

    def point(self, t) -> np.ndarray:
        return self.origin + t * self.direction


@dataclass
class LongStepRecord:
    p: int
    t: object
    S_before: tuple
    S_after: tuple
    alpha: object = None  # None when the LSC optimum did not improve
    lam: object = None
    gap_after: object = None
    extra: dict = field(default_factory=dict)

    @property
    def grew(self) -> bool:
        return set(self.S_before) < set(self.S_after)


def small_set(x, y, N, n) -> tuple:
    """``{i in N : x_i <= 3n y_i}``."""
    return tuple(i for i in N if x[i] <= 3 * n * y[i])


def next_target(origin, direction, N, y_p, t_cur, n):
    """Least ``t >= t_cur`` with ``origin_N + t direction_N >= 4n y_p``; None if there is none."""
    lo, hi = t_cur, math.inf
    for i in N:
        need = 4 * n * y_p[i] - origin[i]
        d = direction[i]
        if d > 0:
            lo = max(lo, need / d)
        elif d < 0:
            hi = min(hi, need / d)
        elif need > 0:
            return None
    if lo > hi:
        return None
    return lo


def lsc_weights(x, B, N, S_p, y_next, f4):
    """Weights realizing the long-step circuit LP as a ratio-circuit call."""
    exact = nm.is_exact(x)
    n = len(x)
    zero = nm.ZERO if exact else 0.0
    v = np.array([zero] * n, dtype=object) if exact else np.zeros(n)
    w = np.empty(n, dtype=object) if exact else np.zeros(n)
    f4 = nm._q(f4) if exact else float(f4)
    S = set(S_p)
    for i in range(n):
        if i in S:
            v[i] = math.inf if y_next[i] == 0 else 1 / (2 * y_next[i])
            w[i] = math.inf
        elif x[i] == 0:
            w[i] = math.inf
        else:
            w[i] = (f4 if i in B else 1) / x[i]
    return v, w


def lsc_step(inst: LpInstance, x, B, N, S_p, y_next, f4=None, exact: Optional[bool] = None) -> RatioCircuitResult:
    """Solve the long-step circuit LP at ``x`` (one ratio-circuit call)."""
    exact = nm.is_exact(x) if exact is None else exact
    B, N = tuple(B), tuple(N)
    if sorted(B + N) != list(range(inst.n)):
        raise ValueError("(B, N) must partition the coordinates")
    if not set(S_p) <= set(N):
        raise ValueError("S_p must be a subset of N")
    f4 = FConstants.for_n(inst.n).f4 if f4 is None else f4
    A, _, c = inst.data(exact)
    v, w = lsc_weights(x, B, N, S_p, y_next, f4)
    return ratio_circuit(A, c, v, w, exact=exact)


def run_long_steps(walker: Walker, xbar, y0, N, guard: Optional[Callable[[], bool]] = None,
                   gap: Optional[Callable] = None, diag: Optional[dict] = None) -> list:
    """Up to ``n`` long steps; ``guard`` is re-checked before each one (always true when forced)."""
    n = walker.n
    N = tuple(sorted(N))
    B = tuple(i for i in range(n) if i not in set(N))
    cast = nm.to_exact if walker.exact else (lambda a: np.asarray(nm.to_float(a), dtype=float))
    xbar, y0 = cast(xbar), cast(y0)
    if all(a == b for a, b in zip(xbar, y0)):
        raise ValueError("xbar and y0 coincide: the ray is undefined")
    f4 = FConstants.for_n(n).f4
    state = LongStepState(0, (), y0, y0, xbar - y0, nm.ZERO if walker.exact else 0.0)
    records = []
    for p in range(n):
        if guard is not None and not guard():
            break
        state.p = p
        state.S_p = small_set(walker.x, state.y_p, N, n)
        t = next_target(state.origin, state.direction, N, state.y_p, state.t, n)
        if t is None:
            break
        y_next = state.point(t)
        v, w = lsc_weights(walker.x, B, N, state.S_p, y_next, f4)
        res = walker.call(walker.c, v, w)
        rec = LongStepRecord(p, t, state.S_p, (), lam=res.lam)
        if not walker.terminal(res):
            step_diag = {"p": p, "S_size": len(state.S_p), **(diag or {})}
            rec.alpha = walker.augment("lsc", res, step_diag)
        rec.S_after = small_set(walker.x, y_next, N, n)
        if gap is not None:
            rec.gap_after = gap(walker.x)
        records.append(rec)
        state.y_p, state.t = y_next, t
    return records


def long_steps_forced(inst: LpInstance, x, xbar, y0, N, opts: Optional[SolveOptions] = None):
    """Standalone forced long steps from ``x``. Returns ``(FeasiblePoint, records)``."""
    walker = Walker(inst, x, opts)
    records = run_long_steps(walker, xbar, y0, N)
    fp, _ = walker.result()
    return fp, records
