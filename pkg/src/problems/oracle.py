"""
Zero-order oracles: noisy evaluations of F(x, Z) driven by a noise chain

An Oracle bundles a problem with an optional deterministic adversarial
perturbation Delta(x) and an optional clipping band. The estimators use its
vectorised `values` / `differences`; `eval_oracle` is the single-query
interface that threads a ChainState.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from ..chains.lazy_chain import ChainState, trajectory
from ..errors import ConfigurationError, UsageError
from .base import Problem, as_matrix


class FeedbackMode(str, Enum):
    ONE_POINT_PLUS = "OnePointPlus"
    ONE_POINT_MINUS = "OnePointMinus"
    TWO_POINT_PAIR = "TwoPointPair"


@dataclass(frozen=True)
class OracleQuery:
    """A point and a feedback mode; pairs also carry the direction and shift"""
    point: np.ndarray
    mode: FeedbackMode = FeedbackMode.ONE_POINT_PLUS
    direction: Optional[np.ndarray] = None
    t: Optional[float] = None


@dataclass(frozen=True)
class OracleReply:
    values: Tuple[float, ...]
    z_steps: int

    @property
    def oracle_calls(self) -> int:
        return len(self.values)


# ============================================================================
# Adversarial perturbations
# ============================================================================

# Fixed irrational projection weights; the perturbation must be seed-free
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _projection(dim: int) -> np.ndarray:
    return 1.0 + np.mod(_GOLDEN * np.arange(1, dim + 1), 1.0)


def _zero(X: np.ndarray, bound: float) -> np.ndarray:
    return np.zeros(X.shape[0])


def _constant(X: np.ndarray, bound: float) -> np.ndarray:
    return np.full(X.shape[0], bound)


def _sign_flip(X: np.ndarray, bound: float, frequency: float = 1.0e4) -> np.ndarray:
    return bound * np.sign(np.sin(frequency * (X @ _projection(X.shape[1]))))


PERTURBATIONS: Dict[str, Callable[[np.ndarray, float], np.ndarray]] = {
    'zero': _zero,
    'constant': _constant,
    'sign_flip': _sign_flip,
}


@dataclass(frozen=True)
class AdversarialSpec:
    """Deterministic bounded perturbation Delta(x) added to every oracle value"""
    delta_bound: float = 0.0
    perturbation: str = 'zero'

    def __post_init__(self):
        if not np.isfinite(self.delta_bound) or self.delta_bound < 0:
            raise ConfigurationError(f"delta_bound must be finite and >= 0, got {self.delta_bound}")
        if self.perturbation not in PERTURBATIONS:
            raise ConfigurationError(
                f"Unknown perturbation: {self.perturbation} (available: {sorted(PERTURBATIONS)})"
            )

    @property
    def is_zero(self) -> bool:
        return self.perturbation == 'zero' or self.delta_bound == 0.0

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return PERTURBATIONS[self.perturbation](X, self.delta_bound)


# ============================================================================
# Clipping
# ============================================================================

def clip_oracle(reply, f_min, f_max, t_clip: float, sigma1: float):
    """
    Clamp oracle values to [f_min - t_clip*sigma1, f_max + t_clip*sigma1]

    Works elementwise on scalars or arrays.

    Raises:
        UsageError: If f_min > f_max anywhere, or t_clip <= 1, or sigma1 < 0
    """
    f_min = np.asarray(f_min, dtype=float)
    f_max = np.asarray(f_max, dtype=float)
    if np.any(f_min > f_max):
        raise UsageError("clip_oracle requires f_min <= f_max")
    if t_clip <= 1:
        raise UsageError(f"t_clip must exceed 1, got {t_clip}")
    if sigma1 < 0:
        raise UsageError(f"sigma1 must be >= 0, got {sigma1}")
    margin = t_clip * sigma1
    clipped = np.maximum(f_min - margin, np.minimum(np.asarray(reply, dtype=float), f_max + margin))
    return float(clipped) if clipped.ndim == 0 else clipped


@dataclass(frozen=True)
class ClipSpec:
    t_clip: float
    sigma1: float

    def __post_init__(self):
        if self.t_clip <= 1 or self.sigma1 < 0:
            raise ConfigurationError(f"ClipSpec needs t_clip > 1 and sigma1 >= 0, got {self}")


# ============================================================================
# Oracle
# ============================================================================

@dataclass(frozen=True)
class Oracle:
    """Noisy zero-order access to a problem"""
    problem: Problem
    adversary: AdversarialSpec = AdversarialSpec()
    clip: Optional[ClipSpec] = None

    @property
    def dim(self) -> int:
        return self.problem.dim

    def values(self, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """F(x_i, z_i) + Delta(x_i), clipped when a ClipSpec is set"""
        X = as_matrix(X, self.problem.dim)
        F = self.problem.noisy_values(X, Z)
        if not self.adversary.is_zero:
            F = F + self.adversary(X)
        if self.clip is not None:
            f_min, f_max = self.problem.value_band(X)
            F = clip_oracle(F, f_min, f_max, self.clip.t_clip, self.clip.sigma1)
        return F

    def differences(self, x: np.ndarray, E: np.ndarray, t: float,
                    Z_plus: np.ndarray, Z_minus: np.ndarray) -> np.ndarray:
        """Value at x + t e_i minus value at x - t e_i, row by row"""
        if self.clip is not None:
            return self.values(x + t * E, Z_plus) - self.values(x - t * E, Z_minus)
        diff = self.problem.differences(x, E, t, Z_plus, Z_minus)
        if not self.adversary.is_zero:
            diff = diff + (self.adversary(x + t * E) - self.adversary(x - t * E))
        return diff

    def with_adversary(self, adversary: AdversarialSpec) -> "Oracle":
        return Oracle(self.problem, adversary, self.clip)


def as_oracle(target: Problem | Oracle) -> Oracle:
    return target if isinstance(target, Oracle) else Oracle(target)


def eval_oracle(target: Problem | Oracle, chain: ChainState, query: OracleQuery) -> Tuple[OracleReply, ChainState]:
    """
    Answer one oracle query and advance the chain

    OnePointPlus evaluates F(x + te, Z_k) and OnePointMinus F(x - te, Z_k),
    each stepping the chain once, so a one-point +/- pair costs two steps.
    A one-point query without direction and t evaluates F(x, Z_k). The
    two-point pair evaluates F(x + te, Z_k) and F(x - te, Z_k) and steps
    the chain once.

    Raises:
        UsageError: On dimension mismatch, a pair query without direction/t,
            or a one-point query carrying only one of direction and t
    """
    oracle = as_oracle(target)
    if chain.dim != oracle.problem.noise_dim:
        raise UsageError(f"Chain dim {chain.dim} does not match noise dim {oracle.problem.noise_dim}")
    x = oracle.problem.check_point(query.point)
    mode = FeedbackMode(query.mode)
    shifted = query.direction is not None and query.t is not None
    if mode is FeedbackMode.TWO_POINT_PAIR and not shifted:
        raise UsageError("TwoPointPair queries need a direction and a shift t")
    if not shifted and (query.direction is not None or query.t is not None):
        raise UsageError(f"{mode.value} queries need both a direction and a shift t, or neither")

    Z, chain = trajectory(chain, 1)
    if not shifted:
        value = oracle.values(x, Z)
        return OracleReply(values=(float(value[0]),), z_steps=1), chain

    e = oracle.problem.check_point(query.direction)
    if mode is FeedbackMode.TWO_POINT_PAIR:
        points = np.vstack([x + query.t * e, x - query.t * e])
        values = oracle.values(points, np.vstack([Z, Z]))
        return OracleReply(values=(float(values[0]), float(values[1])), z_steps=1), chain

    sign = 1.0 if mode is FeedbackMode.ONE_POINT_PLUS else -1.0
    value = oracle.values(x + sign * query.t * e, Z)
    return OracleReply(values=(float(value[0]),), z_steps=1), chain
