"""Comparison estimators: Newton-Raphson MLE and a sequential Gaussian posterior.

Both work on the 1PL likelihood. The Bayesian estimator is a Laplace
approximation updated once per test; feeding the returned belief back in
as the next prior gives the sequential scheme.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .estimator import TestResponse
from .irt import logistic

GRADE_BOUNDS = (1.0, 6.0)

_MAX_ITER = 50
_STEP_TOL = 1e-6


@dataclass(frozen=True)
class GaussianBelief:
    """Gaussian prior/posterior over ability."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError(f"sigma must be finite and > 0, got {self.sigma!r}")


def _grouped(test: TestResponse) -> list[tuple[float, int, int]]:
    """Collapse a test into (difficulty, n_items, n_correct) groups."""
    groups: dict[float, list[int]] = {}
    for item, correct in zip(test.items, test.correct):
        g = groups.setdefault(item.difficulty, [0, 0])
        g[0] += 1
        if correct:
            g[1] += 1
    return [(b, n, k) for b, (n, k) in groups.items()]


def _log_likelihood(theta: float, groups: list[tuple[float, int, int]]) -> float:
    ll = 0.0
    for b, n, k in groups:
        p = logistic(theta - b)
        # Guard log(0) at extreme theta; the optimum never sits there.
        p = min(max(p, 1e-300), 1.0 - 1e-16)
        ll += k * math.log(p) + (n - k) * math.log(1.0 - p)
    return ll


def _newton_max(
    theta: float,
    groups: list[tuple[float, int, int]],
    prior: GaussianBelief | None,
) -> float:
    """Maximize the (optionally prior-penalized) log-likelihood from theta.

    Newton-Raphson with step halving whenever the objective decreases;
    stops when the step shrinks below _STEP_TOL or after _MAX_ITER rounds.
    """

    def objective(t: float) -> float:
        obj = _log_likelihood(t, groups)
        if prior is not None:
            obj -= 0.5 * ((t - prior.mu) / prior.sigma) ** 2
        return obj

    current = objective(theta)
    for _ in range(_MAX_ITER):
        score = 0.0
        info = 0.0
        for b, n, k in groups:
            p = logistic(theta - b)
            score += k - n * p
            info += n * p * (1.0 - p)
        if prior is not None:
            score += (prior.mu - theta) / (prior.sigma**2)
            info += 1.0 / (prior.sigma**2)
        if info <= 0.0:
            break
        step = score / info
        if abs(step) < _STEP_TOL:
            theta += step
            break
        candidate = theta + step
        value = objective(candidate)
        halvings = 0
        while value < current and halvings < 20:
            step *= 0.5
            candidate = theta + step
            value = objective(candidate)
            halvings += 1
        theta, current = candidate, value
    return theta


def mle_estimate(
    test: TestResponse,
    init: float = 3.5,
    bounds: tuple[float, float] = GRADE_BOUNDS,
) -> float:
    """Maximum-likelihood ability for one test, clamped to bounds.

    All-correct and all-incorrect patterns have a monotone likelihood and
    return the upper and lower bound directly.
    """
    lo, hi = bounds
    if not lo < hi:
        raise ValueError(f"bounds must satisfy lo < hi, got {bounds!r}")
    k = test.correct_count
    if k == 0:
        return lo
    if k == test.m:
        return hi
    theta = _newton_max(min(max(init, lo), hi), _grouped(test), prior=None)
    return min(max(theta, lo), hi)


def bme_estimate(test: TestResponse, prior: GaussianBelief) -> GaussianBelief:
    """Laplace approximation of the posterior after one test.

    The mode maximizes log-prior plus log-likelihood; the returned sigma is
    [prior.sigma^-2 + sum_i P_i(1-P_i) at the mode]^(-1/2). Sequential use
    feeds the result back in as the next test's prior.
    """
    groups = _grouped(test)
    mode = _newton_max(prior.mu, groups, prior=prior)
    info = 1.0 / (prior.sigma**2)
    for b, n, _ in groups:
        p = logistic(mode - b)
        info += n * p * (1.0 - p)
    return GaussianBelief(mu=mode, sigma=info**-0.5)
