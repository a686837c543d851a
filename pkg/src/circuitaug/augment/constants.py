"""The polynomial factors f1..f6 in natural-log space."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class FConstants:
    n: int
    log_f1: float
    log_f2: float
    log_f4: float
    log_f5: float
    log_f6: float

    @classmethod
    def for_n(cls, n: int) -> "FConstants":
        if n < 1:
            raise ValueError("n must be positive")
        ln = math.log(n)
        log_f6 = math.log(3785) + 6 * ln
        return cls(
            n=n,
            log_f1=math.log(32) + 2 * ln + 5 * n * math.log(3 * n) + log_f6,
            log_f2=math.log(64) + 2.5 * ln,
            log_f4=math.log(2) + ln,
            log_f5=math.log(2) + 2 * ln,
            log_f6=log_f6,
        )

    def log_f3(self, p: int) -> float:
        return 5 * p * math.log(3 * self.n) + self.log_f6

    @property
    def f4(self) -> float:
        return 2.0 * self.n

    @property
    def f5(self) -> float:
        return 2.0 * self.n ** 2

    @property
    def short_steps(self) -> int:
        """``ceil(n log(4 f1))``, the short-step budget of one round."""
        return math.ceil(self.n * (math.log(4) + self.log_f1))

    @property
    def guess_steps(self) -> int:
        """Wallacher calls needed before partition guessing and the Delta-x bound."""
        n = self.n
        return math.ceil(n * (math.log(8192) + 7.5 * math.log(n))) + math.ceil(4 * n * math.log(4 * n)) + 1

    def check_budget(self) -> None:
        if self.short_steps < self.guess_steps:
            raise AssertionError(f"short-step budget {self.short_steps} < {self.guess_steps} for n={self.n}")


def log_le(log_a: float, log_b: float, rel: float = 0.0) -> bool:
    """``a <= b (1 + rel)`` given natural logs (``-inf`` encodes zero)."""
    if log_a == -math.inf:
        return True
    if log_b == -math.inf:
        return False
    return log_a <= log_b + math.log1p(rel)
