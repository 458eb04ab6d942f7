"""Normal-distribution numerics and one-parameter logistic item models.

Grades are real-valued semester units (nominal range 1..6). Everything in
this module is a pure function of its inputs and safe to call concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import ndtri

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Item:
    """A test item carrying a difficulty on the grade scale."""

    id: str
    difficulty: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.difficulty):
            raise ValueError(f"item difficulty must be finite, got {self.difficulty!r}")


@dataclass(frozen=True)
class AcquisitionDistribution:
    """Normal model N(mu, sigma) of the grade at which knowledge is acquired."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0.0):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma!r}")


def logistic(x: float) -> float:
    """Numerically stable standard logistic 1 / (1 + exp(-x))."""
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def std_normal_quantile(p: float) -> float:
    """Inverse standard normal CDF, accurate to well below 1e-9 absolute."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly inside (0, 1), got {p!r}")
    return float(ndtri(p))


def std_normal_pdf(z: float) -> float:
    """Standard normal density exp(-z^2 / 2) / sqrt(2 pi)."""
    return math.exp(-0.5 * z * z) / _SQRT_2PI


def item_grade_quantile_normal(dist: AcquisitionDistribution, r: float) -> float:
    """Grade by which a fraction r of the population has acquired the item.

    q(r) = mu + ndtri(r) * sigma for an acquisition distribution N(mu, sigma).
    """
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie strictly inside (0, 1), got {r!r}")
    return dist.mu + std_normal_quantile(r) * dist.sigma


def item_grade_quantile_1pl(item: Item, r: float) -> float:
    """Grade at which a fraction r answers the item correctly under the 1PL model.

    q(r) = ln(r / (1 - r)) + b, with b the item difficulty. Inverse of
    icc_1pl with respect to ability.
    """
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie strictly inside (0, 1), got {r!r}")
    return math.log(r / (1.0 - r)) + item.difficulty


def icc_1pl(theta: float, item: Item) -> float:
    """Probability of a correct response at ability theta under the 1PL model."""
    return logistic(theta - item.difficulty)
