"""
Accelerated zero-order optimizer, parameter derivation and tuning
"""

from .params import (
    MomentumParams,
    derive_params,
    default_p,
    momentum_coefficients,
    with_stepsize,
)
from .accelerated import (
    IterateState,
    RunRecord,
    step,
    iterate,
    run,
    run_gradient_descent,
    default_estimator,
)
from .tuning import (
    TuningConstants,
    TuningResult,
    tune_theorem,
    predicted_iterations,
    predicted_oracle_calls,
    RestartRates,
    restart_rates,
    stepsize_for_horizon,
    error_proxy,
    concat_records,
    run_with_restarts,
)

__all__ = [
    # Parameters
    "MomentumParams",
    "derive_params",
    "default_p",
    "momentum_coefficients",
    "with_stepsize",
    # Iteration
    "IterateState",
    "RunRecord",
    "step",
    "iterate",
    "run",
    "run_gradient_descent",
    "default_estimator",
    # Tuning and restarts
    "TuningConstants",
    "TuningResult",
    "tune_theorem",
    "predicted_iterations",
    "predicted_oracle_calls",
    "RestartRates",
    "restart_rates",
    "stepsize_for_horizon",
    "error_proxy",
    "concat_records",
    "run_with_restarts",
]
