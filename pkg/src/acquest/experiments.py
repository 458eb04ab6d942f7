"""Canned experiment grids for the simulation study.

Four experiments: the convergence/RMSE grid over initial-truth gaps and
EMA windows, the estimator-comparison matrix over ability x test
difficulty, single-learner example trajectories, and the learning-factor
study.
"""
from __future__ import annotations

from .simulator import (
    ExperimentCell,
    ExperimentSummary,
    LearnerProfile,
    SimulationConfig,
    Trajectory,
    replication_rng,
    run_replication,
)

N_WINDOWS = tuple(range(1, 13))
GRADES = tuple(range(1, 7))
GAP_RANGE = tuple(range(0, 6))
LEARNING_PROFILES = ("none", "slow", "normal", "fast")
TRAJECTORY_WINDOWS = (1, 3, 6, 12)

DEFAULT_REPLICATIONS = 1000
DEFAULT_SEED = 7


def table1_grid(
    replications: int = DEFAULT_REPLICATIONS, seed: int = DEFAULT_SEED
) -> list[ExperimentCell]:
    """Convergence/RMSE grid: gap d in 0..5 by EMA window n in 1..12.

    Each (d, n) cell pools every valid grade pairing with the estimator
    seeded d grades below the truth, spread round-robin over the cell's
    replications.
    """
    cells = []
    for d in GAP_RANGE:
        for n in N_WINDOWS:
            variants = tuple(
                SimulationConfig(
                    initial_grade=truth - d,
                    truth_grade=truth,
                    n_window=n,
                    replications=replications,
                    seed=seed,
                )
                for truth in range(1 + d, 7)
            )
            cells.append(
                ExperimentCell(key=(d, n), variants=variants, replications=replications)
            )
    return cells


def table2_grid(
    estimator: str,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = DEFAULT_SEED,
    tests_per_replication: int = 100,
) -> list[ExperimentCell]:
    """Estimator-comparison matrix: learner ability x given test difficulty.

    Tests stay pinned at the column grade (no adaptation), the estimator
    starts from that grade, history blending is off (n = 1), and each
    replication is scored over all tests_per_replication tests.
    """
    cells = []
    for ability in GRADES:
        for difficulty in GRADES:
            cfg = SimulationConfig(
                initial_grade=difficulty,
                truth_grade=ability,
                n_window=1,
                estimator=estimator,
                fixed_test_grade=difficulty,
                fixed_length=tests_per_replication,
                replications=replications,
                seed=seed,
            )
            cells.append(
                ExperimentCell(
                    key=(ability, difficulty), variants=(cfg,), replications=replications
                )
            )
    return cells


def learning_grid(
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = DEFAULT_SEED,
    grade: int = 1,
    spread_is_variance: bool = False,
) -> list[ExperimentCell]:
    """Learning-factor study: profile x EMA window, truth drifting upward.

    Initial grade equals the truth grade so the comparison isolates the
    drift.
    """
    cells = []
    for learning in LEARNING_PROFILES:
        for n in N_WINDOWS:
            cfg = SimulationConfig(
                initial_grade=grade,
                truth_grade=grade,
                n_window=n,
                profile=LearnerProfile(initial_grade=grade, learning=learning),
                spread_is_variance=spread_is_variance,
                replications=replications,
                seed=seed,
            )
            cells.append(
                ExperimentCell(key=(learning, n), variants=(cfg,), replications=replications)
            )
    return cells


def trajectory_runs(
    seed: int = 1,
    n_windows: tuple[int, ...] = TRAJECTORY_WINDOWS,
    truth_grade: int = 6,
    initial_grade: int = 1,
) -> dict[int, Trajectory]:
    """One example trajectory per EMA window for a fixed learner."""
    out = {}
    for i, n in enumerate(n_windows):
        cfg = SimulationConfig(
            initial_grade=initial_grade,
            truth_grade=truth_grade,
            n_window=n,
            seed=seed,
        )
        out[n] = run_replication(cfg, replication_rng(seed, i, 0))
    return out


def pooled_rmse(summary: ExperimentSummary, keys: list[tuple]) -> float | None:
    """Exact RMSE pooled across several cells of a summary."""
    sse = 0.0
    n = 0
    for key in keys:
        cell = summary.cells[key]
        if cell.rmse is not None:
            sse += cell.rmse**2 * cell.n_errors
            n += cell.n_errors
    if n == 0:
        return None
    return (sse / n) ** 0.5
