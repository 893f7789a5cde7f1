"""
One-point hard-instance family

    s(xi) = 2 delta xi                    0 <= xi <= delta
          = 3 delta^2 - (xi - 2 delta)^2  delta <= xi <= 2 delta
          = 3 delta^2                     xi >= 2 delta
    s(-xi) = -s(xi)

    S(x)_i = (mu/4) s(x_i)
    f_w(x) = (mu/2)||x||^2 + <S(x), w>,     F_w(x, Z) = f_w(x) + <S(x), Z>

with w in {+-1}^d. The minimiser of f_w is -delta w / 2 and the Hessian of
f_w is diagonal with entries in {mu/2, mu, 3mu/2}.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError, UsageError
from .base import NoiseRegime, Problem, ProblemKind, as_matrix


def hard_instance_s(delta: float, xi):
    """
    Piecewise C^1 profile s(xi), odd in xi; vectorised over xi

    Raises:
        UsageError: If delta <= 0
    """
    if delta <= 0:
        raise UsageError(f"delta must be positive, got {delta}")
    xi = np.asarray(xi, dtype=float)
    a = np.abs(xi)
    magnitude = np.where(
        a <= delta,
        2.0 * delta * a,
        np.where(a <= 2.0 * delta, 3.0 * delta ** 2 - (a - 2.0 * delta) ** 2, 3.0 * delta ** 2),
    )
    result = np.sign(xi) * magnitude
    return float(result) if result.ndim == 0 else result


def hard_instance_s_prime(delta: float, xi):
    """Derivative of s; even in xi, continuous, bounded by 2 delta"""
    xi = np.asarray(xi, dtype=float)
    a = np.abs(xi)
    return np.where(a <= delta, 2.0 * delta,
                    np.where(a <= 2.0 * delta, -2.0 * (a - 2.0 * delta), 0.0))


def hard_instance_s_second(delta: float, xi):
    """Second derivative of s where it exists (0 or -+2 sign(xi))"""
    xi = np.asarray(xi, dtype=float)
    a = np.abs(xi)
    inside = (a > delta) & (a < 2.0 * delta)
    return np.where(inside, -2.0 * np.sign(xi), 0.0)


@dataclass(frozen=True)
class HardOnePoint(Problem):
    """
    Member f_w of the one-point hard family

    `mu` is the family's scale; the guaranteed strong-convexity and
    smoothness constants are mu/2 and 3mu/2.
    """
    dim: int
    mu: float = 1.0
    delta: float = 0.3
    omega: Tuple[float, ...] = ()
    noise_std: Optional[float] = None   # suggested chain std, sqrt(s2)
    kind = ProblemKind.HARD_ONE_POINT
    noise_regime = NoiseRegime.SECOND_MOMENT

    def __post_init__(self):
        omega = tuple(float(s) for s in (self.omega or (1.0,) * self.dim))
        if len(omega) != self.dim or any(abs(s) != 1.0 for s in omega):
            raise ConfigurationError(f"omega must be a sign vector of length {self.dim}")
        if self.mu <= 0 or self.delta <= 0:
            raise ConfigurationError("HardOnePoint needs mu > 0 and delta > 0")
        object.__setattr__(self, 'omega', omega)

    @classmethod
    def from_budget(cls, dim: int, mu: float, sigma1_sq: float, tau: int, n_iterations: int,
                    omega: Optional[Tuple[float, ...]] = None) -> "HardOnePoint":
        """delta = (sigma1^2 tau / (mu^2 d N))^(1/4), stationary variance s^2 = 8N / tau"""
        delta = (sigma1_sq * tau / (mu ** 2 * dim * n_iterations)) ** 0.25
        return cls(dim=dim, mu=mu, delta=float(delta), omega=tuple(omega) if omega is not None else (),
                   noise_std=float(np.sqrt(8.0 * n_iterations / tau)))

    @property
    def s2(self) -> Optional[float]:
        return None if self.noise_std is None else self.noise_std ** 2

    @property
    def strong_convexity(self) -> float:
        return 0.5 * self.mu

    @property
    def smoothness(self) -> float:
        return 1.5 * self.mu

    @property
    def minimizer(self) -> np.ndarray:
        return -0.5 * self.delta * np.asarray(self.omega)

    def separable_part(self, X: np.ndarray) -> np.ndarray:
        """S(x) for each row"""
        return 0.25 * self.mu * hard_instance_s(self.delta, as_matrix(X, self.dim))

    def values(self, X):
        X = as_matrix(X, self.dim)
        return 0.5 * self.mu * np.sum(X ** 2, axis=1) + self.separable_part(X) @ np.asarray(self.omega)

    def noise_values(self, X, Z):
        return np.einsum('ij,ij->i', self.separable_part(X), Z)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return self.mu * x + 0.25 * self.mu * hard_instance_s_prime(self.delta, x) * np.asarray(self.omega)

    def noise_gradient(self, x, z):
        return 0.25 * self.mu * hard_instance_s_prime(self.delta, np.asarray(x, dtype=float)) * np.asarray(z)

    def hessian_diagonal(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.mu + 0.25 * self.mu * hard_instance_s_second(self.delta, x) * np.asarray(self.omega)

    def value_band(self, X):
        X = as_matrix(X, self.dim)
        base = 0.5 * self.mu * np.sum(X ** 2, axis=1)
        spread = np.sum(np.abs(self.separable_part(X)), axis=1)
        return base - spread, base + spread

    def _spec_params(self) -> Dict[str, Any]:
        return {'delta': self.delta, 'omega': list(self.omega), 'scale_mu': self.mu}
