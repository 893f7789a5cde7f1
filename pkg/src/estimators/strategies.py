"""
Estimator strategies consumed by the optimizer

Each strategy is a callable (oracle, chain, x, rng) -> (GradEstimate, chain).
"""

from dataclasses import dataclass
from typing import Protocol, Tuple

import numpy as np

from ..chains.lazy_chain import ChainState
from ..problems.oracle import Oracle, as_oracle
from .finite_difference import GradEstimate, SmoothingConfig, minibatch_estimate, rd_estimate
from .mlmc import MlmcConfig, expected_oracle_calls, mlmc_estimate


class GradientEstimator(Protocol):
    def __call__(self, oracle: Oracle, chain: ChainState, x: np.ndarray,
                 rng: np.random.Generator) -> Tuple[GradEstimate, ChainState]:
        ...


@dataclass(frozen=True)
class MlmcEstimator:
    mlmc: MlmcConfig
    smoothing: SmoothingConfig

    def __call__(self, oracle, chain, x, rng):
        return mlmc_estimate(oracle, chain, x, self.mlmc, self.smoothing, rng)

    @property
    def expected_calls(self) -> float:
        return expected_oracle_calls(self.mlmc)


@dataclass(frozen=True)
class RandomDirectionEstimator:
    n: int
    smoothing: SmoothingConfig

    def __call__(self, oracle, chain, x, rng):
        return rd_estimate(oracle, chain, x, self.n, self.smoothing, rng)

    @property
    def expected_calls(self) -> float:
        return 2.0 * self.n


@dataclass(frozen=True)
class MinibatchEstimator:
    n: int
    smoothing: SmoothingConfig

    def __call__(self, oracle, chain, x, rng):
        return minibatch_estimate(oracle, chain, x, self.n, self.smoothing, rng=rng)

    @property
    def expected_calls(self) -> float:
        return 2.0 * self.n


@dataclass(frozen=True)
class ExactGradientEstimator:
    """Stand-in returning grad f(x) without touching the oracle or the chain"""

    def __call__(self, oracle, chain, x, rng):
        problem = as_oracle(oracle).problem
        return GradEstimate(vector=problem.gradient(np.asarray(x, dtype=float)), oracle_calls=0), chain

    @property
    def expected_calls(self) -> float:
        return 0.0
