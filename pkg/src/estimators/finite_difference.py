"""
Finite-difference gradient estimators

A single estimate along a unit direction e is

    g = d * (F(x + te, Z+) - F(x - te, Z-)) / (2t) * e

Two-point feedback uses one chain value for both evaluations and one chain
step per sample; one-point feedback uses consecutive chain values for the
+ and - evaluations and two chain steps per sample.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from ..chains.lazy_chain import ChainState, trajectory
from ..errors import ConfigurationError, UsageError
from ..problems.oracle import Oracle, as_oracle
from .sampling import sample_sphere, sample_sphere_batch


class Feedback(str, Enum):
    ONE_POINT = "one_point"
    TWO_POINT = "two_point"


@dataclass(frozen=True)
class SmoothingConfig:
    t: float                                  # finite-difference shift
    feedback: Feedback = Feedback.TWO_POINT

    def __post_init__(self):
        try:
            object.__setattr__(self, 'feedback', Feedback(self.feedback))
        except ValueError:
            raise ConfigurationError(f"Unknown feedback: {self.feedback}")
        if not np.isfinite(self.t) or self.t <= 0:
            raise UsageError(f"Smoothing shift t must be positive, got {self.t}")

    @property
    def steps_per_sample(self) -> int:
        return 1 if self.feedback is Feedback.TWO_POINT else 2


@dataclass(frozen=True, eq=False)
class GradEstimate:
    """
    Estimated gradient and its exact oracle cost

    Attributes:
        vector: The estimate
        oracle_calls: Number of F evaluations performed
        level_j: Sampled MLMC level, 0 for non-MLMC estimators
        n_samples: Number of +/- pairs evaluated
        samples: Per-sample single estimates g_1, g_2, ... (only when requested)
    """
    vector: np.ndarray
    oracle_calls: int
    level_j: int = 0
    n_samples: int = 0
    samples: Optional[np.ndarray] = None


def noise_schedule(chain: ChainState, n: int, cfg: SmoothingConfig) -> Tuple[np.ndarray, np.ndarray, ChainState]:
    """Chain values seen by the + and - evaluations of n samples"""
    if cfg.feedback is Feedback.TWO_POINT:
        Z, chain = trajectory(chain, n)
        return Z, Z, chain
    Z, chain = trajectory(chain, 2 * n)
    return Z[0::2], Z[1::2], chain


def directional_samples(oracle: Oracle, chain: ChainState, x: np.ndarray, E: np.ndarray,
                        cfg: SmoothingConfig) -> Tuple[np.ndarray, ChainState]:
    """
    Single estimates for each direction row of E, in chain order

    Returns:
        (G, chain) with G[i] = d * (F+ - F-) / (2t) * e_i
    """
    oracle = as_oracle(oracle)
    if chain.dim != oracle.problem.noise_dim:
        raise UsageError(f"Chain dim {chain.dim} does not match noise dim {oracle.problem.noise_dim}")
    x = oracle.problem.check_point(x)
    Z_plus, Z_minus, chain = noise_schedule(chain, E.shape[0], cfg)
    slopes = oracle.differences(x, E, cfg.t, Z_plus, Z_minus) / (2.0 * cfg.t)
    return oracle.dim * slopes[:, None] * E, chain


def single_estimate(oracle: Oracle, chain: ChainState, x: np.ndarray, e: np.ndarray,
                    cfg: SmoothingConfig) -> Tuple[GradEstimate, ChainState]:
    """
    One finite-difference estimate along the unit direction e

    Raises:
        UsageError: If ||e|| differs from 1
    """
    e = np.asarray(e, dtype=float)
    if abs(np.linalg.norm(e) - 1.0) > 1e-9:
        raise UsageError(f"Direction must have unit norm, got {np.linalg.norm(e)}")
    G, chain = directional_samples(oracle, chain, x, e[None, :], cfg)
    return GradEstimate(vector=G[0], oracle_calls=2, n_samples=1), chain


def minibatch_estimate(oracle: Oracle, chain: ChainState, x: np.ndarray, n: int, cfg: SmoothingConfig,
                       rng: Optional[np.random.Generator] = None,
                       direction: Optional[np.ndarray] = None) -> Tuple[GradEstimate, ChainState]:
    """Average of n single estimates sharing one direction e"""
    if n < 1:
        raise UsageError(f"Batch size must be >= 1, got {n}")
    if direction is None:
        if rng is None:
            raise UsageError("minibatch_estimate needs an rng or an explicit direction")
        direction = sample_sphere(oracle.dim, rng)
    E = np.broadcast_to(np.asarray(direction, dtype=float), (n, oracle.dim))
    G, chain = directional_samples(oracle, chain, x, E, cfg)
    return GradEstimate(vector=G.mean(axis=0), oracle_calls=2 * n, n_samples=n), chain


def rd_estimate(oracle: Oracle, chain: ChainState, x: np.ndarray, n: int, cfg: SmoothingConfig,
                rng: np.random.Generator) -> Tuple[GradEstimate, ChainState]:
    """Average of n single estimates, each along a fresh random direction"""
    if n < 1:
        raise UsageError(f"Batch size must be >= 1, got {n}")
    E = sample_sphere_batch(n, oracle.dim, rng)
    G, chain = directional_samples(oracle, chain, x, E, cfg)
    return GradEstimate(vector=G.mean(axis=0), oracle_calls=2 * n, n_samples=n), chain
