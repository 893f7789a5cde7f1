"""
Strongly convex, Lipschitz, non-smooth test problem
"""

from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from ..errors import ConfigurationError
from .base import NoiseRegime, Problem, ProblemKind, as_matrix


@dataclass(frozen=True)
class NonsmoothL1(Problem):
    """
    f(x) = (mu/2)||x||^2 + c ||x||_1 on the ball of radius `radius`

    Minimiser 0; G = mu * radius + c * sqrt(d) bounds the Lipschitz constant
    on the ball. The oracle adds <x, Z>.
    """
    dim: int
    mu: float = 1.0
    l1_weight: float = 0.1
    radius: float = 1.0
    kind = ProblemKind.NONSMOOTH_L1
    noise_regime = NoiseRegime.SECOND_MOMENT

    def __post_init__(self):
        if self.dim < 1 or self.mu <= 0 or self.l1_weight < 0 or self.radius <= 0:
            raise ConfigurationError(
                f"NonsmoothL1 needs dim >= 1, mu > 0, l1_weight >= 0, radius > 0; "
                f"got dim={self.dim}, mu={self.mu}, l1_weight={self.l1_weight}, radius={self.radius}"
            )

    @property
    def strong_convexity(self) -> float:
        return float(self.mu)

    @property
    def lipschitz(self) -> float:
        return float(self.mu * self.radius + self.l1_weight * np.sqrt(self.dim))

    @property
    def minimizer(self) -> np.ndarray:
        return np.zeros(self.dim)

    def values(self, X):
        X = as_matrix(X, self.dim)
        return 0.5 * self.mu * np.sum(X ** 2, axis=1) + self.l1_weight * np.sum(np.abs(X), axis=1)

    def noise_values(self, X, Z):
        return np.einsum('ij,ij->i', X, Z)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return self.mu * x + self.l1_weight * np.sign(x)

    def noise_gradient(self, x, z):
        return np.asarray(z, dtype=float)

    def differences(self, x, E, t, Z_plus, Z_minus):
        E = as_matrix(E, self.dim, "E")
        Z_plus = as_matrix(Z_plus, self.dim, "Z_plus")
        Z_minus = as_matrix(Z_minus, self.dim, "Z_minus")
        x = np.asarray(x, dtype=float)
        l1 = np.sum(np.abs(x + t * E), axis=1) - np.sum(np.abs(x - t * E), axis=1)
        return (2.0 * t * self.mu * (E @ x)
                + self.l1_weight * l1
                + (Z_plus - Z_minus) @ x
                + t * np.einsum('ij,ij->i', E, Z_plus + Z_minus))

    def _spec_params(self) -> Dict[str, Any]:
        return {'l1_weight': self.l1_weight, 'radius': self.radius}
