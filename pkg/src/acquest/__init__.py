"""Grade-scale ability estimation from acquisition distributions.

Per-item grade quantiles feed an order-statistic estimate of a learner's
ability from one test; an exponential moving average blends the estimate
with the learner's history. Newton-Raphson MLE and a sequential Gaussian
posterior serve as baselines, and a seeded Monte-Carlo harness reproduces
the convergence and RMSE experiments.
"""

__version__ = "0.1.0"

from .baselines import GRADE_BOUNDS, GaussianBelief, bme_estimate, mle_estimate
from .estimator import (
    SIGMA_MIN,
    AbilityEstimate,
    AbilityState,
    TestResponse,
    build_test,
    ema_update,
    estimate_current_ability,
    process_test,
    smooth_proportion,
)
from .experiments import (
    learning_grid,
    pooled_rmse,
    table1_grid,
    table2_grid,
    trajectory_runs,
)
from .irt import (
    AcquisitionDistribution,
    Item,
    icc_1pl,
    item_grade_quantile_1pl,
    item_grade_quantile_normal,
    logistic,
    std_normal_pdf,
    std_normal_quantile,
)
from .metrics import ConvergenceRule, convergence_point, rmse
from .simulator import (
    LEARNING_RATES,
    CellStats,
    ExperimentCell,
    ExperimentSummary,
    LearnerProfile,
    SimulationConfig,
    Trajectory,
    apply_learning_factor,
    generate_test,
    replication_rng,
    run_experiment,
    run_replication,
    sample_initial_ability,
    simulate_responses,
)

__all__ = [
    "__version__",
    "AbilityEstimate",
    "AbilityState",
    "AcquisitionDistribution",
    "CellStats",
    "ConvergenceRule",
    "ExperimentCell",
    "ExperimentSummary",
    "GaussianBelief",
    "GRADE_BOUNDS",
    "Item",
    "LEARNING_RATES",
    "LearnerProfile",
    "SIGMA_MIN",
    "SimulationConfig",
    "TestResponse",
    "Trajectory",
    "apply_learning_factor",
    "bme_estimate",
    "build_test",
    "convergence_point",
    "ema_update",
    "estimate_current_ability",
    "generate_test",
    "icc_1pl",
    "item_grade_quantile_1pl",
    "item_grade_quantile_normal",
    "learning_grid",
    "logistic",
    "mle_estimate",
    "pooled_rmse",
    "process_test",
    "replication_rng",
    "rmse",
    "run_experiment",
    "run_replication",
    "sample_initial_ability",
    "simulate_responses",
    "smooth_proportion",
    "std_normal_pdf",
    "std_normal_quantile",
    "table1_grid",
    "table2_grid",
    "trajectory_runs",
]
