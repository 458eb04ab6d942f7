"""Trajectory scoring: RMSE and the convergence-point detector."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class ConvergenceRule:
    """A trajectory converges when run_length consecutive errors drop below thd."""

    thd: float = 0.25
    run_length: int = 4

    def __post_init__(self) -> None:
        if not self.thd > 0.0:
            raise ValueError(f"thd must be > 0, got {self.thd!r}")
        if self.run_length < 1:
            raise ValueError(f"run_length must be >= 1, got {self.run_length!r}")


def rmse(estimates: Sequence[float], truths: Sequence[float]) -> float:
    """Root mean square error between two equally long nonempty sequences."""
    if len(estimates) != len(truths):
        raise ValueError(
            f"length mismatch: {len(estimates)} estimates vs {len(truths)} truths"
        )
    if not estimates:
        raise ValueError("rmse needs at least one element")
    total = math.fsum((e - t) ** 2 for e, t in zip(estimates, truths))
    return math.sqrt(total / len(estimates))


def convergence_point(
    estimates: Sequence[float],
    truths: Sequence[float],
    rule: ConvergenceRule = ConvergenceRule(),
) -> int | None:
    """First index opening a run of run_length errors below thd, or None."""
    if len(estimates) != len(truths):
        raise ValueError(
            f"length mismatch: {len(estimates)} estimates vs {len(truths)} truths"
        )
    run = 0
    for i, (e, t) in enumerate(zip(estimates, truths)):
        if abs(e - t) < rule.thd:
            run += 1
            if run == rule.run_length:
                return i - rule.run_length + 1
        else:
            run = 0
    return None
