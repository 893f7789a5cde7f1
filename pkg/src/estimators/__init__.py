"""
Zero-order gradient estimators
"""

from .sampling import (
    LevelLaw,
    sample_sphere,
    sample_sphere_batch,
    sample_ball,
    sample_ball_batch,
    sample_level,
    sample_levels,
    level_probability,
)
from .finite_difference import (
    Feedback,
    SmoothingConfig,
    GradEstimate,
    noise_schedule,
    directional_samples,
    single_estimate,
    minibatch_estimate,
    rd_estimate,
)
from .mlmc import MlmcConfig, mlmc_estimate, expected_oracle_calls, batch_levels, level_weight
from .strategies import (
    GradientEstimator,
    MlmcEstimator,
    RandomDirectionEstimator,
    MinibatchEstimator,
    ExactGradientEstimator,
)

__all__ = [
    # Sampling
    "LevelLaw",
    "sample_sphere",
    "sample_sphere_batch",
    "sample_ball",
    "sample_ball_batch",
    "sample_level",
    "sample_levels",
    "level_probability",
    # Finite differences
    "Feedback",
    "SmoothingConfig",
    "GradEstimate",
    "noise_schedule",
    "directional_samples",
    "single_estimate",
    "minibatch_estimate",
    "rd_estimate",
    # MLMC
    "MlmcConfig",
    "mlmc_estimate",
    "expected_oracle_calls",
    "batch_levels",
    "level_weight",
    # Strategies
    "GradientEstimator",
    "MlmcEstimator",
    "RandomDirectionEstimator",
    "MinibatchEstimator",
    "ExactGradientEstimator",
]
