"""Baseline circuit walk: Wallacher's minimum-ratio rule until the ratio vanishes."""
from __future__ import annotations

from typing import Optional

from ..lp_model import LpInstance
from .options import SolveOptions
from .walk import Walker


def solve_wallacher(inst: LpInstance, x0, opts: Optional[SolveOptions] = None):
    """Returns ``(FeasiblePoint, WalkTrace)``; stops once ``lambda <= eps_term (1 + |<c,x>|)``."""
    walker = Walker(inst, x0, opts)
    while True:
        res = walker.wallacher_call()
        if walker.terminal(res):
            break
        walker.augment("wallacher", res)
    return walker.result()
