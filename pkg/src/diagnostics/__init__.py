"""
Statistical verification harness: moment reports, Monte-Carlo checks and suites
"""

from .moments import (
    MomentReport,
    check_result,
    standard_error,
    variance_with_se,
    within_se,
    fit_loglog_slope,
)
from .checks import (
    batched_noise_means,
    check_markov_variance,
    check_smoothing,
    estimator_samples,
    closed_form_mlmc_mean,
    check_mlmc_moments,
    check_telescoping,
    mlmc_variance_sweep,
    check_adversarial_floor,
    oracle_call_stats,
    oracle_complexity_sweep,
    check_mixing_time,
    check_quadratic_exactness,
    check_worked_example,
)
from .suites import SUITES, run_suite

__all__ = [
    # Reports
    "MomentReport",
    "check_result",
    "standard_error",
    "variance_with_se",
    "within_se",
    "fit_loglog_slope",
    # Checks
    "batched_noise_means",
    "check_markov_variance",
    "check_smoothing",
    "estimator_samples",
    "closed_form_mlmc_mean",
    "check_mlmc_moments",
    "check_telescoping",
    "mlmc_variance_sweep",
    "check_adversarial_floor",
    "oracle_call_stats",
    "oracle_complexity_sweep",
    "check_mixing_time",
    "check_quadratic_exactness",
    "check_worked_example",
    # Suites
    "SUITES",
    "run_suite",
]
