"""
Quadratic problems with linear noise

    f(x) = 1/2 sum_i lam_i x_i^2 + <b, x>,    F(x, Z) = f(x) + <x, Z>

covers the isotropic (d, tau) grid quadratic, the ill-conditioned diagonal quadratic and
the two-point hard family f_v.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError
from .base import NoiseRegime, Problem, ProblemKind, as_matrix


class LinearNoiseQuadratic(Problem):
    """Shared algebra for diagonal quadratics with additive <x, Z> noise"""

    noise_regime = NoiseRegime.SECOND_MOMENT

    @property
    def eigenvalues(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def linear_term(self) -> np.ndarray:
        return np.zeros(self.dim)

    @property
    def strong_convexity(self) -> float:
        return float(self.eigenvalues.min())

    @property
    def smoothness(self) -> float:
        return float(self.eigenvalues.max())

    @property
    def minimizer(self) -> np.ndarray:
        return -self.linear_term / self.eigenvalues

    def values(self, X: np.ndarray) -> np.ndarray:
        X = as_matrix(X, self.dim)
        return 0.5 * (X ** 2) @ self.eigenvalues + X @ self.linear_term

    def noise_values(self, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
        return np.einsum('ij,ij->i', X, Z)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.eigenvalues * np.asarray(x, dtype=float) + self.linear_term

    def noise_gradient(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float)

    def differences(self, x, E, t, Z_plus, Z_minus):
        # exact expansion: 2t<e, lam*x + b> + <x, Z+ - Z-> + t<e, Z+ + Z->
        E = as_matrix(E, self.dim, "E")
        Z_plus = as_matrix(Z_plus, self.dim, "Z_plus")
        Z_minus = as_matrix(Z_minus, self.dim, "Z_minus")
        x = np.asarray(x, dtype=float)
        if Z_plus is Z_minus:
            return 2.0 * t * (E @ self.gradient(x) + np.einsum('ij,ij->i', E, Z_plus))
        return (2.0 * t * (E @ self.gradient(x))
                + (Z_plus - Z_minus) @ x
                + t * np.einsum('ij,ij->i', E, Z_plus + Z_minus))


@dataclass(frozen=True)
class QuadraticMarkov(LinearNoiseQuadratic):
    """f(x) = (mu/2)||x||^2, the objective of the (d, tau, sigma2) grid"""
    dim: int
    mu: float = 1.0
    kind = ProblemKind.QUADRATIC_MARKOV

    def __post_init__(self):
        if self.dim < 1 or self.mu <= 0:
            raise ConfigurationError(f"QuadraticMarkov needs dim >= 1 and mu > 0, got dim={self.dim}, mu={self.mu}")

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.full(self.dim, float(self.mu))


@dataclass(frozen=True)
class DiagQuadratic(LinearNoiseQuadratic):
    """f(x) = 1/2 x^T diag(lam) x with lam log-spaced in [mu, L]"""
    dim: int
    mu: float = 0.1
    L: float = 1.0
    kind = ProblemKind.DIAG_QUADRATIC

    def __post_init__(self):
        if self.dim < 1 or not 0 < self.mu <= self.L:
            raise ConfigurationError(f"DiagQuadratic needs dim >= 1 and 0 < mu <= L, got mu={self.mu}, L={self.L}")

    @property
    def eigenvalues(self) -> np.ndarray:
        if self.dim == 1:
            return np.array([float(self.mu)])
        return np.geomspace(self.mu, self.L, self.dim)

    def _spec_params(self) -> Dict[str, Any]:
        return {'L': self.L}


@dataclass(frozen=True)
class HardTwoPoint(LinearNoiseQuadratic):
    """
    Two-point hard family f_v(x) = (mu/2)||x||^2 + delta <x, v>, v in {+-1}^d

    F_v(x, Z) = (mu/2)||x||^2 + <x, delta v + Z>, minimiser -delta v / mu.
    """
    dim: int
    mu: float = 1.0
    delta: float = 0.1
    v: Tuple[float, ...] = ()
    noise_std: Optional[float] = None   # suggested chain std, sqrt(sigma2^2 / d)
    kind = ProblemKind.HARD_TWO_POINT

    def __post_init__(self):
        v = tuple(float(s) for s in (self.v or (1.0,) * self.dim))
        if len(v) != self.dim or any(abs(s) != 1.0 for s in v):
            raise ConfigurationError(f"v must be a sign vector of length {self.dim}")
        if self.mu <= 0 or self.delta <= 0:
            raise ConfigurationError("HardTwoPoint needs mu > 0 and delta > 0")
        object.__setattr__(self, 'v', v)

    @classmethod
    def from_budget(cls, dim: int, mu: float, sigma2_sq: float, n_iterations: int,
                    v: Optional[Tuple[float, ...]] = None) -> "HardTwoPoint":
        """delta^2 = sigma2^2 / (4N), stationary noise variance s^2 = sigma2^2 / d"""
        return cls(dim=dim, mu=mu, delta=float(np.sqrt(sigma2_sq / (4.0 * n_iterations))),
                   v=tuple(v) if v is not None else (), noise_std=float(np.sqrt(sigma2_sq / dim)))

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.full(self.dim, float(self.mu))

    @property
    def linear_term(self) -> np.ndarray:
        return self.delta * np.asarray(self.v)

    def value_band(self, X):
        X = as_matrix(X, self.dim)
        base = 0.5 * self.mu * np.sum(X ** 2, axis=1)
        spread = self.delta * np.sum(np.abs(X), axis=1)
        return base - spread, base + spread

    def _spec_params(self) -> Dict[str, Any]:
        return {'delta': self.delta, 'v': list(self.v)}
