"""The acquisition-distribution ability estimator.

A single test is scored by fitting a normal to the per-item grade
quantiles and reading off the smoothed-proportion-correct quantile of
that fit; the normal approximation of order statistics supplies a
variance for the score. Successive tests blend through an exponential
moving average over the learner's history.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from .irt import Item, std_normal_pdf, std_normal_quantile

#: Floor on the fitted grade spread; keeps the order-statistic density
#: finite when every item in a test shares one difficulty.
SIGMA_MIN = 1e-3

DEFAULT_R = 0.5
DEFAULT_C = 0.01


@dataclass(frozen=True)
class TestResponse:
    """One administered test: items plus per-item correctness, same order."""

    items: tuple[Item, ...]
    correct: tuple[bool, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "correct", tuple(self.correct))
        if len(self.items) != len(self.correct):
            raise ValueError(
                f"items and correct must have equal length, "
                f"got {len(self.items)} and {len(self.correct)}"
            )
        if not self.items:
            raise ValueError("a test needs at least one item")

    @property
    def m(self) -> int:
        return len(self.items)

    @property
    def correct_count(self) -> int:
        return sum(1 for c in self.correct if c)


@dataclass(frozen=True)
class AbilityEstimate:
    """Single-test ability estimate: the order-statistic mean and variance."""

    mean: float
    variance: float
    s_used: float
    r_used: float


@dataclass(frozen=True)
class AbilityState:
    """EMA-blended longitudinal ability together with its per-test history.

    ``ability`` is None until the first test is processed unless an
    initial ability (e.g. the learner's school grade) seeds the state.
    """

    n_window: int
    ability: float | None = None
    history: tuple[tuple[AbilityEstimate, float], ...] = ()

    def __post_init__(self) -> None:
        if self.n_window < 1:
            raise ValueError(f"n_window must be >= 1, got {self.n_window!r}")
        object.__setattr__(self, "history", tuple(self.history))

    @property
    def alpha(self) -> float:
        return 2.0 / (self.n_window + 1)

    @property
    def test_count(self) -> int:
        return len(self.history)

    def to_json(self) -> str:
        doc = {
            "ability": self.ability,
            "n_window": self.n_window,
            "alpha": self.alpha,
            "test_count": self.test_count,
            "history": [
                {
                    "estimate": {
                        "mean": est.mean,
                        "variance": est.variance,
                        "s_used": est.s_used,
                        "r_used": est.r_used,
                    },
                    "ability": blended,
                }
                for est, blended in self.history
            ],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "AbilityState":
        doc = json.loads(text)
        history = tuple(
            (
                AbilityEstimate(
                    mean=entry["estimate"]["mean"],
                    variance=entry["estimate"]["variance"],
                    s_used=entry["estimate"]["s_used"],
                    r_used=entry["estimate"]["r_used"],
                ),
                entry["ability"],
            )
            for entry in doc["history"]
        )
        state = cls(n_window=doc["n_window"], ability=doc["ability"], history=history)
        if state.test_count != doc["test_count"]:
            raise ValueError("state file is inconsistent: test_count != len(history)")
        return state


def smooth_proportion(correct_count: int, m: int, c: float = DEFAULT_C) -> float:
    """Proportion correct, pulled off the 0/1 boundary by the constant c."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m!r}")
    if not 0 <= correct_count <= m:
        raise ValueError(f"correct_count must lie in [0, {m}], got {correct_count!r}")
    if not 0.0 < c < 0.5:
        raise ValueError(f"c must lie strictly inside (0, 0.5), got {c!r}")
    if correct_count == 0:
        return c
    if correct_count == m:
        return 1.0 - c
    return correct_count / m


def estimate_current_ability(
    test: TestResponse, r: float = DEFAULT_R, c: float = DEFAULT_C
) -> AbilityEstimate:
    """Score one test against the grade distribution of its own items.

    Fits N(mu, sigma) to the per-item grade quantiles at population
    proportion r (maximum-likelihood sigma, floored at SIGMA_MIN), then
    returns the smoothed-proportion-correct quantile of the fit as the
    mean and the order-statistic normal-approximation variance
    s(1-s) / (m * f(mean)^2).
    """
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie strictly inside (0, 1), got {r!r}")
    m = test.m
    shift = math.log(r / (1.0 - r))
    grades = [shift + item.difficulty for item in test.items]
    mu = math.fsum(grades) / m
    var = math.fsum((g - mu) ** 2 for g in grades) / m
    sigma = max(math.sqrt(var), SIGMA_MIN)

    s = smooth_proportion(test.correct_count, m, c)
    z = std_normal_quantile(s)
    mean = mu + z * sigma
    density = std_normal_pdf(z) / sigma
    variance = s * (1.0 - s) / (m * density * density)
    return AbilityEstimate(mean=mean, variance=variance, s_used=s, r_used=r)


def ema_update(theta_t: float, prev_ability: float | None, n: int) -> float:
    """Blend the current estimate into the running ability with weight 2/(n+1).

    With no previous ability the current estimate seeds the average.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    if prev_ability is None:
        return theta_t
    alpha = 2.0 / (n + 1)
    return alpha * theta_t + (1.0 - alpha) * prev_ability


def process_test(
    state: AbilityState,
    test: TestResponse,
    r: float = DEFAULT_R,
    c: float = DEFAULT_C,
) -> AbilityState:
    """Score a test and fold it into the learner's state; returns a new state."""
    est = estimate_current_ability(test, r, c)
    blended = ema_update(est.mean, state.ability, state.n_window)
    return AbilityState(
        n_window=state.n_window,
        ability=blended,
        history=state.history + ((est, blended),),
    )


def build_test(
    difficulties: Sequence[float],
    correct: Sequence[bool],
    ids: Sequence[str] | None = None,
) -> TestResponse:
    """Convenience constructor for a TestResponse from raw difficulties."""
    if ids is None:
        ids = [f"item-{i}" for i in range(len(difficulties))]
    items = tuple(Item(id=str(i), difficulty=float(b)) for i, b in zip(ids, difficulties))
    return TestResponse(items=items, correct=tuple(bool(c) for c in correct))
