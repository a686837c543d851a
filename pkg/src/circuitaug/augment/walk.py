"""Shared walk state: counts oracle calls, applies maximal steps, records the trace."""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from .. import numeric as nm
from ..lp_model import InstanceError, LpInstance, check_feasible
from ..ratio_circuit import RatioCircuitResult, UnboundedOracle, aug_max, is_terminal, ratio_circuit, wallacher_weights
from ..trace import WalkTrace
from .options import DegenerateRun, IterationLimit, SolveOptions

log = logging.getLogger(__name__)


class Walker:
    def __init__(self, inst: LpInstance, x0, opts: Optional[SolveOptions] = None):
        self.inst = inst
        self.opts = opts or SolveOptions()
        self.exact = self.opts.exact
        self.A, _, self.c = inst.data(self.exact)
        x = nm.to_exact(x0) if self.exact else np.asarray(nm.to_float(x0), dtype=float).copy()
        fp = check_feasible(inst, x)
        if not hasattr(fp, "objective"):
            raise InstanceError(f"x0 is infeasible: {fp}")
        if not self.exact:
            x = np.maximum(x, 0.0)
        self.x = x
        self.n = inst.n
        self.trace = WalkTrace(inst.name, x.copy(), self.exact, record=self.opts.trace_level != "off")
        self._zero_run = 0

    @property
    def objective(self):
        return self.c.dot(self.x)

    def call(self, u, v, w) -> RatioCircuitResult:
        if self.trace.oracle_calls >= self.opts.max_iters:
            raise IterationLimit(f"max_iters={self.opts.max_iters} oracle calls exhausted")
        self.trace.oracle_calls += 1
        res = ratio_circuit(self.A, u, v, w, exact=self.exact)
        if res.status != "optimal":
            raise UnboundedOracle("ratio-circuit LP unbounded: the instance is unbounded")
        return res

    def wallacher_call(self) -> RatioCircuitResult:
        v, w = wallacher_weights(self.x)
        return self.call(self.c, v, w)

    def terminal(self, res: RatioCircuitResult) -> bool:
        return is_terminal(res, self.objective, self.opts.eps_term)

    def augment(self, kind: str, res: RatioCircuitResult, diag: Optional[dict] = None):
        xn, alpha = aug_max(self.x, res.z, self.exact)
        if alpha == 0:
            self._zero_run += 1
            if self._zero_run >= 3 * self.n:
                raise DegenerateRun(f"{self._zero_run} consecutive zero-length steps")
        else:
            self._zero_run = 0
        self.x = xn
        self.trace.add(kind, res.z, alpha, self.objective, res.lam, diag)
        return alpha

    def note(self, diag: dict) -> None:
        self.trace.add("none", None, nm.ZERO if self.exact else 0.0, self.objective, None, diag)

    def result(self):
        fp = check_feasible(self.inst, self.x)
        if not hasattr(fp, "objective"):
            raise ArithmeticError(f"walk left the feasible region: {fp}")
        return fp, self.trace
