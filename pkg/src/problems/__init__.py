"""
Objective functions and their zero-order oracles
"""

from .base import (
    ProblemKind,
    NoiseRegime,
    ProblemSpec,
    Problem,
    eval_objective,
    initial_point,
)
from .quadratics import QuadraticMarkov, DiagQuadratic, HardTwoPoint
from .nonsmooth import NonsmoothL1
from .hard_instances import HardOnePoint, hard_instance_s, hard_instance_s_prime
from .oracle import (
    FeedbackMode,
    OracleQuery,
    OracleReply,
    AdversarialSpec,
    ClipSpec,
    Oracle,
    clip_oracle,
    eval_oracle,
    as_oracle,
)
from .registry import build_problem, spec_from_config
from .validators import numerical_minimizer, validate_assumptions

__all__ = [
    # Problem interface
    "ProblemKind",
    "NoiseRegime",
    "ProblemSpec",
    "Problem",
    "eval_objective",
    "initial_point",
    # Concrete problems
    "QuadraticMarkov",
    "DiagQuadratic",
    "HardTwoPoint",
    "NonsmoothL1",
    "HardOnePoint",
    "hard_instance_s",
    "hard_instance_s_prime",
    # Oracles
    "FeedbackMode",
    "OracleQuery",
    "OracleReply",
    "AdversarialSpec",
    "ClipSpec",
    "Oracle",
    "clip_oracle",
    "eval_oracle",
    "as_oracle",
    # Construction and validation
    "build_problem",
    "spec_from_config",
    "validate_assumptions",
    "numerical_minimizer",
]
