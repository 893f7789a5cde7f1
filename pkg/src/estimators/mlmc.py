"""
Multilevel Monte-Carlo gradient estimator

    g_ml = g_rd[l] + 2^J (g_rd[2^J l] - g_rd[2^(J-1) l])   if 2^J <= M
         = g_rd[l]                                        otherwise

Sample layout: the base term uses samples 1..l; the correction uses the next
2^J l samples, with g_rd[2^(J-1) l] on the first half of that block and
g_rd[2^J l] on the whole block. One chain is threaded through all samples
in that order, so an estimate costs 2(l + [2^J <= M] 2^J l) oracle calls.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..chains.lazy_chain import ChainState
from ..errors import ConfigurationError
from ..problems.oracle import Oracle
from ..utils.logging_utils import get_logger
from .finite_difference import GradEstimate, SmoothingConfig, directional_samples
from .sampling import LevelLaw, level_probability, sample_level, sample_sphere_batch

logger = get_logger(__name__)


def level_weight(j: int) -> float:
    """Weight of the level-j correction"""
    return float(2 ** j)


def batch_levels(M: float) -> Optional[int]:
    """floor(log2 M), or None for an unbounded batch limit"""
    if math.isinf(M):
        return None
    j = math.floor(math.log2(M))
    # log2 can round just below an exact power of two
    if 2 ** (j + 1) <= M:
        j += 1
    return j


@dataclass(frozen=True)
class MlmcConfig:
    """
    Batch parameters of the MLMC estimator

    Attributes:
        B: Batch-size multiplier
        M: Batch-size limit (may be math.inf)
        p: Momentum coupling constant the limit was derived from, if any
        l: Base batch size; defaults to (floor(log2 M) + 1) * B
        law: Distribution of the level J
    """
    B: int = 1
    M: float = 8.0
    p: Optional[float] = None
    l: Optional[int] = None
    law: LevelLaw = LevelLaw.GEOMETRIC

    def __post_init__(self):
        if int(self.B) != self.B or self.B < 1:
            raise ConfigurationError(f"B must be a positive integer, got {self.B}")
        if not self.M >= 1:
            raise ConfigurationError(f"Batch limit M must be >= 1, got {self.M}")
        if self.p is not None and not 0 < self.p <= 1:
            raise ConfigurationError(f"p must lie in (0, 1], got {self.p}")
        try:
            object.__setattr__(self, 'law', LevelLaw(self.law))
        except ValueError:
            raise ConfigurationError(f"Unknown level law: {self.law}")

        if self.l is None:
            if self.j_max is None:
                raise ConfigurationError("An unbounded batch limit M needs an explicit base batch l")
            object.__setattr__(self, 'l', (self.j_max + 1) * int(self.B))
        elif int(self.l) != self.l or self.l < 1:
            raise ConfigurationError(f"Base batch l must be a positive integer, got {self.l}")
        object.__setattr__(self, 'B', int(self.B))
        object.__setattr__(self, 'l', int(self.l))

    @classmethod
    def from_momentum(cls, params, law: LevelLaw = LevelLaw.GEOMETRIC) -> "MlmcConfig":
        """
        Batch parameters paired with MomentumParams

        Raises:
            ConfigurationError: If params.M differs from 1/p + 2/beta
        """
        expected = 1.0 / params.p + 2.0 / params.beta
        if not math.isclose(params.M, expected, rel_tol=1e-12):
            raise ConfigurationError(f"M={params.M} does not equal 1/p + 2/beta = {expected}")
        return cls(B=params.B, M=params.M, p=params.p, l=params.l, law=law)

    @property
    def j_max(self) -> Optional[int]:
        return batch_levels(self.M)

    def uses_correction(self, j: int) -> bool:
        return j >= 1 and 2 ** j <= self.M

    @property
    def is_table_consistent(self) -> bool:
        """Whether l equals (floor(log2 M) + 1) * B"""
        return self.j_max is not None and self.l == (self.j_max + 1) * self.B


def expected_oracle_calls(cfg: MlmcConfig) -> float:
    """Closed form 2l(1 + sum_{j=1}^{j_max} P(J=j) 2^j)"""
    if cfg.j_max is None:
        return math.inf
    weight = sum(level_probability(j, cfg.law) * 2 ** j for j in range(1, cfg.j_max + 1))
    return 2.0 * cfg.l * (1.0 + weight)


def mlmc_estimate(
    oracle: Oracle,
    chain: ChainState,
    x: np.ndarray,
    cfg: MlmcConfig,
    smoothing: SmoothingConfig,
    rng: np.random.Generator,
    record_samples: bool = False,
) -> Tuple[GradEstimate, ChainState]:
    """
    One MLMC gradient estimate at x

    Args:
        oracle: Zero-order oracle
        chain: Noise chain, advanced through every sample in order
        x: Query point
        cfg: Batch parameters
        smoothing: Shift t and feedback mode
        rng: Generator for the level and the directions
        record_samples: Attach the per-sample single estimates

    Returns:
        (GradEstimate, new chain state)
    """
    j = sample_level(rng, cfg.law)
    base = cfg.l
    correction = cfg.uses_correction(j)
    block = (2 ** j) * base if correction else 0
    n_total = base + block

    E = sample_sphere_batch(n_total, oracle.dim, rng)
    G, chain = directional_samples(oracle, chain, x, E, smoothing)

    vector = G[:base].mean(axis=0)
    if correction:
        upper = G[base:]
        lower = upper[: block // 2]
        vector = vector + level_weight(j) * (upper.mean(axis=0) - lower.mean(axis=0))

    estimate = GradEstimate(
        vector=vector,
        oracle_calls=2 * n_total,
        level_j=j,
        n_samples=n_total,
        samples=G if record_samples else None,
    )
    return estimate, chain
