"""
Momentum and batch parameters of the accelerated zero-order method

    beta  = sqrt(4 p^2 mu gamma / 3)
    eta   = sqrt(3 / (mu gamma))
    theta = (p/eta - 1) / (beta p/eta - 1)
    M     = 1/p + 2/beta
    l     = (floor(log2 M) + 1) B
"""

import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Optional

from ..errors import ConfigurationError, DegenerateParametersError
from ..estimators.finite_difference import Feedback
from ..estimators.mlmc import batch_levels

# Minimum distance of beta*p/eta from 1 before theta is considered undefined
DEGENERACY_TOL = 1e-12
AFFINE_TOL = 1e-12


def momentum_coefficients(gamma: float, p: float, mu: float, B: int) -> Dict[str, float]:
    """
    Derived fields (beta, eta, theta, M, l) as pure functions of (gamma, p, mu, B)

    Raises:
        ConfigurationError: If gamma, p or mu are out of range
        DegenerateParametersError: If |beta p / eta - 1| < 1e-12
    """
    if not gamma > 0 or not math.isfinite(gamma):
        raise ConfigurationError(f"gamma must be positive and finite, got {gamma}")
    if not 0 < p <= 1:
        raise ConfigurationError(f"p must lie in (0, 1], got {p}")
    if not mu > 0:
        raise ConfigurationError(f"mu must be positive, got {mu}")

    beta = math.sqrt(4.0 * p * p * mu * gamma / 3.0)
    eta = math.sqrt(3.0 / (mu * gamma))
    denominator = beta * p / eta - 1.0
    if abs(denominator) < DEGENERACY_TOL:
        raise DegenerateParametersError(
            f"theta is undefined: beta*p/eta = {beta * p / eta!r} (gamma={gamma}, p={p}, mu={mu})"
        )
    theta = (p / eta - 1.0) / denominator
    M = 1.0 / p + 2.0 / beta
    l = (batch_levels(M) + 1) * int(B)
    return {'beta': beta, 'eta': eta, 'theta': theta, 'M': M, 'l': l}


def default_p(B: int, dim: int, smooth: bool = True) -> float:
    """B/(B+d) for smooth objectives, 1 for non-smooth ones"""
    return B / (B + dim) if smooth else 1.0


@dataclass(frozen=True)
class MomentumParams:
    """Full parameter set of one run; derived fields are validated on construction"""
    gamma: float
    t: float
    B: int
    p: float
    beta: float
    eta: float
    theta: float
    M: float
    l: int
    N: int
    mu: float
    L: float                                  # smoothness of f (or of f_t when non-smooth)
    dim: int = 1
    feedback: Feedback = Feedback.TWO_POINT
    smooth: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'feedback', Feedback(self.feedback))
        if int(self.N) != self.N or self.N < 0:
            raise ConfigurationError(f"N must be a non-negative integer, got {self.N}")
        if not self.t > 0:
            raise ConfigurationError(f"t must be positive, got {self.t}")
        cap = 3.0 / (4.0 * self.L)
        if not 0 < self.gamma <= cap * (1 + 1e-12):
            raise ConfigurationError(f"gamma={self.gamma} outside (0, 3/(4L)] = (0, {cap:.6g}]")

        derived = momentum_coefficients(self.gamma, self.p, self.mu, self.B)
        for name, value in derived.items():
            if getattr(self, name) != value:
                raise ConfigurationError(f"Stored {name}={getattr(self, name)!r} does not match derived {value!r}")

        coefficients = (self.eta + (self.p - self.eta) + (1 - self.p) * (1 - self.beta)
                        + (1 - self.p) * self.beta)
        if abs(coefficients - 1.0) > AFFINE_TOL * max(1.0, self.eta):
            raise ConfigurationError(f"Update coefficients sum to {coefficients!r}, not 1")
        if self.p ** 2 * self.mu < self.L and not self.beta < 1:
            raise ConfigurationError(f"beta={self.beta} must be < 1 when p^2 mu < L")

    @property
    def j_max(self) -> int:
        return batch_levels(self.M)

    def as_dict(self) -> Dict[str, Any]:
        snapshot = asdict(self)
        snapshot['feedback'] = self.feedback.value
        return snapshot


def derive_params(
    mu: float,
    lipschitz: float,
    gamma: float,
    t: float,
    B: int = 1,
    p: Optional[float] = None,
    feedback: Feedback = Feedback.TWO_POINT,
    smooth: bool = True,
    dim: int = 1,
    N: int = 1000,
) -> MomentumParams:
    """
    Populate all parameters from (mu, L or G, gamma, p, B)

    Args:
        mu: Strong-convexity constant
        lipschitz: L for smooth objectives, G for non-smooth ones
        gamma: Stepsize
        t: Finite-difference shift
        B: Batch-size multiplier
        p: Momentum coupling; defaults to B/(B+d) (smooth) or 1 (non-smooth)
        feedback: One- or two-point feedback
        smooth: Whether `lipschitz` is a gradient Lipschitz constant
        dim: Problem dimension d
        N: Iteration budget

    Returns:
        MomentumParams

    Raises:
        DegenerateParametersError: If theta is undefined
        ConfigurationError: If gamma > 3/(4L) or any field is out of range
    """
    if int(B) != B or B < 1:
        raise ConfigurationError(f"B must be a positive integer, got {B}")
    if not t > 0:
        raise ConfigurationError(f"t must be positive, got {t}")
    L = lipschitz if smooth else math.sqrt(dim) * lipschitz / t
    if p is None:
        p = default_p(int(B), dim, smooth)

    derived = momentum_coefficients(gamma, p, mu, int(B))
    if gamma > 3.0 / (4.0 * L) * (1 + 1e-12):
        raise ConfigurationError(f"gamma={gamma} exceeds 3/(4L) = {3.0 / (4.0 * L):.6g}")

    return MomentumParams(
        gamma=gamma, t=t, B=int(B), p=p, N=int(N), mu=mu, L=L, dim=dim,
        feedback=Feedback(feedback), smooth=smooth, **derived,
    )


def with_stepsize(params: MomentumParams, gamma: float, N: Optional[int] = None) -> MomentumParams:
    """Copy of `params` at a new stepsize (and horizon), derived fields recomputed"""
    derived = momentum_coefficients(gamma, params.p, params.mu, params.B)
    return replace(params, gamma=gamma, N=params.N if N is None else int(N), **derived)
