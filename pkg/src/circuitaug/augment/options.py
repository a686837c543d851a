from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..ratio_circuit import EPS_TERM

RULES = ("wallacher", "existential", "full")
TRACE_LEVELS = ("off", "steps", "full")


class IterationLimit(RuntimeError):
    """The oracle-call budget ``max_iters`` ran out before termination."""


class DegenerateRun(ArithmeticError):
    """Too many consecutive zero-length augmentations."""


@dataclass
class SolveOptions:
    rule: str = "full"
    max_iters: int = 20000
    eps_term: float = EPS_TERM
    trace_level: str = "steps"
    exact: bool = False
    # overrides the per-round short-step count (testing the round structure only)
    short_steps: Optional[int] = None

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}; expected one of {RULES}")
        if self.trace_level not in TRACE_LEVELS:
            raise ValueError(f"unknown trace level {self.trace_level!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.short_steps is not None and self.short_steps < 0:
            raise ValueError("short_steps must be nonnegative")
