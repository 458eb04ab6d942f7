"""Seeded Monte-Carlo simulation of longitudinal testing and estimation.

A replication draws a true ability, then loops: drift the truth by the
learning factor, generate a test (adaptively at the current estimate or at
a fixed grade), draw 1PL responses at the truth, and update the chosen
estimator. Replications own private RNG streams derived from
(seed, cell index, replication index), so results are byte-identical
regardless of execution order or parallelism.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .baselines import GRADE_BOUNDS, GaussianBelief, _newton_max
from .estimator import SIGMA_MIN, ema_update, smooth_proportion
from .irt import Item, logistic, std_normal_quantile
from .metrics import rmse

GRADE_MIN = 1
GRADE_MAX = 6

#: Per-test additive drift of true ability: learning speed -> (mean, spread).
#: The spread is read as a standard deviation by default; a config switch
#: restores the variance reading.
LEARNING_RATES = {
    "none": (0.0, 0.0),
    "slow": (0.0027425, 0.001),
    "normal": (0.0054945, 0.001),
    "fast": (0.010989, 0.001),
}

ESTIMATORS = ("proposed", "mle", "bme")
TEST_GEN_MODES = ("deterministic", "stochastic")


@dataclass(frozen=True)
class LearnerProfile:
    """Ground-truth side of a simulated learner."""

    initial_grade: int
    init_sd: float = 0.2
    learning: str = "none"

    def __post_init__(self) -> None:
        if not GRADE_MIN <= self.initial_grade <= GRADE_MAX:
            raise ValueError(
                f"initial_grade must lie in [{GRADE_MIN}, {GRADE_MAX}], "
                f"got {self.initial_grade!r}"
            )
        if not self.init_sd >= 0.0:
            raise ValueError(f"init_sd must be >= 0, got {self.init_sd!r}")
        if self.learning not in LEARNING_RATES:
            raise ValueError(
                f"learning must be one of {sorted(LEARNING_RATES)}, got {self.learning!r}"
            )


@dataclass(frozen=True)
class SimulationConfig:
    """Full parameterization of one simulated learner/estimator pairing.

    ``initial_grade`` seeds the estimator; the truth starts at
    ``truth_grade`` (jittered by the profile's init_sd). Tests follow the
    current estimate unless ``fixed_test_grade`` pins them. A
    ``fixed_length`` run administers exactly that many tests and is scored
    over all of them; otherwise the run extends to the convergence point
    plus run_length plus post_convergence_iters tests, capped at max_tests.
    """

    initial_grade: int
    truth_grade: int
    items_per_test: int = 10
    r: float = 0.5
    c: float = 0.01
    n_window: int = 12
    estimator: str = "proposed"
    profile: LearnerProfile | None = None
    thd: float = 0.25
    run_length: int = 4
    post_convergence_iters: int = 100
    replications: int = 1000
    seed: int = 0
    test_gen: str = "deterministic"
    spread_is_variance: bool = False
    fixed_test_grade: int | None = None
    fixed_length: int | None = None
    max_tests: int = 1000
    bme_prior_sigma: float = 1.0

    def __post_init__(self) -> None:
        for name in ("initial_grade", "truth_grade"):
            grade = getattr(self, name)
            if not GRADE_MIN <= grade <= GRADE_MAX:
                raise ValueError(
                    f"{name} must lie in [{GRADE_MIN}, {GRADE_MAX}], got {grade!r}"
                )
        if self.profile is None:
            object.__setattr__(self, "profile", LearnerProfile(self.truth_grade))
        elif self.profile.initial_grade != self.truth_grade:
            raise ValueError(
                "profile.initial_grade must match truth_grade, "
                f"got {self.profile.initial_grade!r} vs {self.truth_grade!r}"
            )
        for name in (
            "items_per_test",
            "n_window",
            "run_length",
            "post_convergence_iters",
            "replications",
            "max_tests",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)!r}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        if self.test_gen not in TEST_GEN_MODES:
            raise ValueError(f"test_gen must be one of {TEST_GEN_MODES}, got {self.test_gen!r}")
        if not self.thd > 0.0:
            raise ValueError(f"thd must be > 0, got {self.thd!r}")
        if self.seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.fixed_test_grade is not None and not (
            GRADE_MIN <= self.fixed_test_grade <= GRADE_MAX
        ):
            raise ValueError(f"fixed_test_grade out of range: {self.fixed_test_grade!r}")
        if self.fixed_length is not None and self.fixed_length < 1:
            raise ValueError(f"fixed_length must be >= 1, got {self.fixed_length!r}")


@dataclass(frozen=True)
class Trajectory:
    """One replication: per-test truths and blended estimates plus scores."""

    true_abilities: tuple[float, ...]
    estimates: tuple[float, ...]
    convergence_point: int | None
    rmse_after: float | None


@dataclass(frozen=True)
class CellStats:
    """Aggregated scores of one experiment cell.

    n_errors counts the squared-error terms pooled into rmse, which lets
    callers re-pool cells exactly.
    """

    mean_convergence_point: float | None
    rmse: float | None
    replications_converged: int
    replications: int
    n_errors: int = 0


@dataclass(frozen=True)
class ExperimentCell:
    """A keyed cell of the experiment grid.

    Replication i runs variants[i % len(variants)]; spreading a cell over
    several truth grades keeps the paper-style pooling reproducible.
    """

    key: tuple
    variants: tuple[SimulationConfig, ...]
    replications: int

    def __post_init__(self) -> None:
        if not self.variants:
            raise ValueError("a cell needs at least one config variant")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications!r}")


@dataclass(frozen=True)
class ExperimentSummary:
    """Per-cell aggregate results keyed by the grid's cell keys."""

    cells: dict[tuple, CellStats]


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def sample_initial_ability(grade: int, sd: float, rng: np.random.Generator) -> float:
    """One draw of a true ability around a school grade."""
    if not GRADE_MIN <= grade <= GRADE_MAX:
        raise ValueError(f"grade must lie in [{GRADE_MIN}, {GRADE_MAX}], got {grade!r}")
    return float(rng.normal(grade, sd))


_DET_TEST_CACHE: dict[tuple[int, int], tuple[Item, ...]] = {}


def _deterministic_test(grade: int, m: int) -> tuple[Item, ...]:
    cached = _DET_TEST_CACHE.get((grade, m))
    if cached is not None:
        return cached
    tail = min(math.ceil(0.2 * m), m // 2)
    low = max(grade - 1, GRADE_MIN)
    high = min(grade + 1, GRADE_MAX)
    difficulties = [low] * tail + [grade] * (m - 2 * tail) + [high] * tail
    items = tuple(
        Item(id=f"g{grade}m{m}-{i}", difficulty=float(b))
        for i, b in enumerate(difficulties)
    )
    _DET_TEST_CACHE[(grade, m)] = items
    return items


def generate_test(
    theta: float,
    m: int,
    mode: str = "deterministic",
    rng: np.random.Generator | None = None,
) -> tuple[Item, ...]:
    """Difficulties for an m-item test aimed at ability theta.

    Deterministic mode rounds theta half-up to a grade g clipped to the
    grade range and emits ceil(0.2 m) items one grade below, ceil(0.2 m)
    one above, and the remainder at g (2/6/2 for m = 10). Stochastic mode
    rounds m draws from N(theta, 1) and clips them to the grade range.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m!r}")
    if mode == "deterministic":
        grade = min(max(_round_half_up(theta), GRADE_MIN), GRADE_MAX)
        return _deterministic_test(grade, m)
    if mode == "stochastic":
        if rng is None:
            raise ValueError("stochastic test generation needs an rng")
        draws = np.clip(np.floor(rng.normal(theta, 1.0, size=m) + 0.5), GRADE_MIN, GRADE_MAX)
        return tuple(
            Item(id=f"s{i}", difficulty=float(b)) for i, b in enumerate(draws)
        )
    raise ValueError(f"unknown test generation mode {mode!r}")


def simulate_responses(
    theta_true: float, items: Sequence[Item], rng: np.random.Generator
) -> list[bool]:
    """Independent Bernoulli responses with 1PL probabilities at theta_true."""
    if not items:
        raise ValueError("simulate_responses needs at least one item")
    draws = rng.random(len(items))
    out = []
    for u, item in zip(draws, items):
        x = theta_true - item.difficulty
        if x >= 0.0:
            p = 1.0 / (1.0 + math.exp(-x))
        else:
            e = math.exp(x)
            p = e / (1.0 + e)
        out.append(bool(u < p))
    return out


def apply_learning_factor(
    theta_true: float,
    profile: LearnerProfile,
    rng: np.random.Generator,
    spread_is_variance: bool = False,
) -> float:
    """Drift the true ability by one sampled learning increment.

    The 'none' profile returns the input unchanged (and consumes no
    randomness). The result is not clipped; long runs may exceed the
    top grade.
    """
    if profile.learning == "none":
        return theta_true
    mean, spread = LEARNING_RATES[profile.learning]
    sd = math.sqrt(spread) if spread_is_variance else spread
    return theta_true + float(rng.normal(mean, sd))


# Grouped fast path: a test is a tuple of (difficulty, n_items) groups and
# the estimators consume per-group correct counts, so replications draw one
# binomial per group. This matches per-item Bernoulli sampling in
# distribution while keeping the inner loop allocation-free.

_DET_GROUP_CACHE: dict[tuple[int, int], tuple[tuple[float, int], ...]] = {}


def _deterministic_groups(grade: int, m: int) -> tuple[tuple[float, int], ...]:
    cached = _DET_GROUP_CACHE.get((grade, m))
    if cached is None:
        counts: dict[float, int] = {}
        for item in _deterministic_test(grade, m):
            counts[item.difficulty] = counts.get(item.difficulty, 0) + 1
        cached = tuple(sorted(counts.items()))
        _DET_GROUP_CACHE[(grade, m)] = cached
    return cached


def _test_groups(
    theta: float, m: int, mode: str, rng: np.random.Generator
) -> tuple[tuple[float, int], ...]:
    if mode == "deterministic":
        grade = min(max(_round_half_up(theta), GRADE_MIN), GRADE_MAX)
        return _deterministic_groups(grade, m)
    draws = np.clip(np.floor(rng.normal(theta, 1.0, size=m) + 0.5), GRADE_MIN, GRADE_MAX)
    counts: dict[float, int] = {}
    for b in draws:
        b = float(b)
        counts[b] = counts.get(b, 0) + 1
    return tuple(sorted(counts.items()))


_GROUP_FIT_CACHE: dict[tuple[tuple[float, int], ...], tuple[float, float]] = {}


def _group_fit(groups: tuple[tuple[float, int], ...], m: int) -> tuple[float, float]:
    """Mean and ML standard deviation of the groups' difficulty sample."""
    cached = _GROUP_FIT_CACHE.get(groups)
    if cached is None:
        mean = sum(b * n for b, n in groups) / m
        var = sum(n * (b - mean) ** 2 for b, n in groups) / m
        cached = (mean, math.sqrt(var))
        _GROUP_FIT_CACHE[groups] = cached
    return cached


_Z_CACHE: dict[tuple[int, int, float], float] = {}


def _z_of_count(correct: int, m: int, c: float) -> float:
    key = (correct, m, c)
    z = _Z_CACHE.get(key)
    if z is None:
        z = std_normal_quantile(smooth_proportion(correct, m, c))
        _Z_CACHE[key] = z
    return z


class _ProposedDriver:
    def __init__(self, config: SimulationConfig):
        self.prev: float = float(config.initial_grade)
        self.n = config.n_window
        self.shift = math.log(config.r / (1.0 - config.r))
        self.c = config.c

    def update(
        self, groups: tuple[tuple[float, int], ...], ks: list[int], m: int
    ) -> float:
        mean_b, sigma_b = _group_fit(groups, m)
        sigma = max(sigma_b, SIGMA_MIN)
        theta_t = mean_b + self.shift + _z_of_count(sum(ks), m, self.c) * sigma
        self.prev = ema_update(theta_t, self.prev, self.n)
        return self.prev


class _MleDriver:
    """Maximum-likelihood over the accumulated response history."""

    def __init__(self, config: SimulationConfig):
        self.theta: float = float(config.initial_grade)
        self.groups: dict[float, list[int]] = {}
        self.total = 0
        self.correct = 0

    def update(
        self, groups: tuple[tuple[float, int], ...], ks: list[int], m: int
    ) -> float:
        for (b, n), k in zip(groups, ks):
            g = self.groups.setdefault(b, [0, 0])
            g[0] += n
            g[1] += k
        self.total += m
        self.correct += sum(ks)
        lo, hi = GRADE_BOUNDS
        if self.correct == 0:
            self.theta = lo
        elif self.correct == self.total:
            self.theta = hi
        else:
            flat = [(b, n, k) for b, (n, k) in self.groups.items()]
            theta = _newton_max(self.theta, flat, prior=None)
            self.theta = min(max(theta, lo), hi)
        return self.theta


class _BmeDriver:
    """Sequential Gaussian-posterior updates, one per test."""

    def __init__(self, config: SimulationConfig):
        self.belief = GaussianBelief(
            mu=float(config.initial_grade), sigma=config.bme_prior_sigma
        )

    def update(
        self, groups: tuple[tuple[float, int], ...], ks: list[int], m: int
    ) -> float:
        flat = [(b, n, k) for (b, n), k in zip(groups, ks)]
        mode = _newton_max(self.belief.mu, flat, prior=self.belief)
        info = 1.0 / (self.belief.sigma**2)
        for b, n, _ in flat:
            p = logistic(mode - b)
            info += n * p * (1.0 - p)
        self.belief = GaussianBelief(mu=mode, sigma=info**-0.5)
        return self.belief.mu


_DRIVERS = {"proposed": _ProposedDriver, "mle": _MleDriver, "bme": _BmeDriver}


def run_replication(config: SimulationConfig, rng: np.random.Generator) -> Trajectory:
    """Simulate one learner until the run's horizon; score convergence and RMSE.

    Convergence-mode runs stop run_length + post_convergence_iters tests
    after the convergence point (cap max_tests); the reported RMSE window
    is the post_convergence_iters tests immediately following the
    qualifying run. Fixed-length runs stop at fixed_length tests.
    """
    profile = config.profile
    truth = sample_initial_ability(profile.initial_grade, profile.init_sd, rng)
    driver = _DRIVERS[config.estimator](config)
    current = float(config.initial_grade)
    estimates: list[float] = []
    truths: list[float] = []
    conv: int | None = None
    run = 0
    L = config.run_length
    k = config.post_convergence_iters
    m = config.items_per_test
    binomial = rng.binomial
    drifting = profile.learning != "none"
    fixed_center = (
        float(config.fixed_test_grade) if config.fixed_test_grade is not None else None
    )

    while True:
        t = len(estimates)
        if config.fixed_length is not None:
            if t >= config.fixed_length:
                break
        elif conv is not None and t >= conv + L + k:
            break
        if t >= config.max_tests:
            break
        if drifting:
            truth = apply_learning_factor(truth, profile, rng, config.spread_is_variance)
        center = fixed_center if fixed_center is not None else current
        groups = _test_groups(center, m, config.test_gen, rng)
        ks = [int(binomial(n, logistic(truth - b))) for b, n in groups]
        current = driver.update(groups, ks, m)
        estimates.append(current)
        truths.append(truth)
        if conv is None:
            if abs(current - truth) < config.thd:
                run += 1
                if run == L:
                    conv = t - L + 1
            else:
                run = 0

    rmse_after = None
    if conv is not None:
        start = conv + L
        window_est = estimates[start : start + k]
        if window_est:
            rmse_after = rmse(window_est, truths[start : start + k])
        else:
            conv = None
    return Trajectory(tuple(truths), tuple(estimates), conv, rmse_after)


def replication_rng(seed: int, cell_index: int, rep_index: int) -> np.random.Generator:
    """The private RNG stream of one replication."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(cell_index, rep_index))
    return np.random.default_rng(ss)


def _score_cell(cell_index: int, cell: ExperimentCell) -> CellStats:
    conv_sum = 0.0
    conv_n = 0
    sse = 0.0
    n_err = 0
    variants = cell.variants
    for rep in range(cell.replications):
        cfg = variants[rep % len(variants)]
        traj = run_replication(cfg, replication_rng(cfg.seed, cell_index, rep))
        if traj.convergence_point is not None:
            conv_n += 1
            conv_sum += traj.convergence_point
        if cfg.fixed_length is not None:
            sse += math.fsum(
                (e - t) ** 2 for e, t in zip(traj.estimates, traj.true_abilities)
            )
            n_err += len(traj.estimates)
        elif traj.convergence_point is not None:
            start = traj.convergence_point + cfg.run_length
            window = len(traj.estimates) - start
            window = min(window, cfg.post_convergence_iters)
            sse += traj.rmse_after**2 * window
            n_err += window
    return CellStats(
        mean_convergence_point=conv_sum / conv_n if conv_n else None,
        rmse=math.sqrt(sse / n_err) if n_err else None,
        replications_converged=conv_n,
        replications=cell.replications,
        n_errors=n_err,
    )


def _score_cell_args(args: tuple[int, ExperimentCell]) -> CellStats:
    return _score_cell(*args)


def run_experiment(
    grid: Sequence[ExperimentCell | SimulationConfig],
    parallelism: int | None = None,
) -> ExperimentSummary:
    """Run every cell of a grid and aggregate per-cell statistics.

    Output is identical for any parallelism degree: each replication owns
    an RNG stream derived from (seed, cell index, replication index) and
    cells reduce their replications in index order.
    """
    if not grid:
        raise ValueError("experiment grid must not be empty")
    cells: list[ExperimentCell] = []
    for i, entry in enumerate(grid):
        if isinstance(entry, SimulationConfig):
            entry = ExperimentCell(
                key=(i,), variants=(entry,), replications=entry.replications
            )
        cells.append(entry)
    keys = [cell.key for cell in cells]
    if len(set(keys)) != len(keys):
        raise ValueError("cell keys must be unique")

    if parallelism is not None and parallelism > 1 and len(cells) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            stats = list(pool.map(_score_cell_args, list(enumerate(cells))))
    else:
        stats = [_score_cell(i, cell) for i, cell in enumerate(cells)]
    return ExperimentSummary(cells=dict(zip(keys, stats)))
