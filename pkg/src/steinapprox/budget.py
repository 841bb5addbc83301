"""Cooperative wall-clock budgets checked at iteration boundaries."""

from __future__ import annotations

import time


class BudgetExceeded(RuntimeError):
    """Raised by :meth:`Deadline.check` once the budget is spent."""

    def __init__(self, kind: str = "timeout"):
        super().__init__(kind)
        self.kind = kind


class Deadline:
    def __init__(self, seconds: float | None):
        self.seconds = seconds
        self.start = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def expired(self) -> bool:
        return self.seconds is not None and self.elapsed() >= self.seconds

    def check(self) -> None:
        if self.expired():
            raise BudgetExceeded("timeout")
