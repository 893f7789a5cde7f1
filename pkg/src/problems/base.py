"""
Objective-function interface shared by all test problems

A problem knows its noiseless objective f, the noisy oracle F(x, Z), its
structural constants and its minimiser. All evaluation methods are
vectorised over rows: X has shape (n, d) and Z has shape (n, noise_dim).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..errors import UsageError


class ProblemKind(str, Enum):
    QUADRATIC_MARKOV = "QuadraticMarkov"
    DIAG_QUADRATIC = "DiagQuadratic"
    NONSMOOTH_L1 = "NonsmoothL1"
    HARD_ONE_POINT = "HardOnePoint"
    HARD_TWO_POINT = "HardTwoPoint"


class NoiseRegime(str, Enum):
    UNIFORM_BOUND = "UniformBound"    # |F - f| <= sigma_1 everywhere
    SECOND_MOMENT = "SecondMoment"    # only E|F - f|^2 is bounded


@dataclass(frozen=True)
class ProblemSpec:
    """
    Config-level description of a problem

    `minimizer` is derived by build_problem when left as None; `params`
    carries kind-specific fields (l1_weight, delta, omega, v, radius).
    """
    kind: ProblemKind
    dim: int
    mu: float = 1.0
    lips_grad: Optional[float] = None
    lips_f: Optional[float] = None
    minimizer: Optional[Tuple[float, ...]] = None
    params: Dict[str, Any] = field(default_factory=dict)


def as_matrix(X: np.ndarray, dim: int, name: str = "X") -> np.ndarray:
    """Coerce a point or a batch of points to shape (n, dim)"""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != dim:
        raise UsageError(f"{name} has shape {X.shape}, expected (n, {dim})")
    return X


class Problem(ABC):
    """Base class of all objective functions"""

    kind: ProblemKind
    noise_regime: NoiseRegime = NoiseRegime.SECOND_MOMENT
    dim: int

    # -- structural constants ------------------------------------------------

    @property
    @abstractmethod
    def strong_convexity(self) -> float:
        """mu: guaranteed strong-convexity constant"""

    @property
    def smoothness(self) -> Optional[float]:
        """L: gradient Lipschitz constant, None when f is not smooth"""
        return None

    @property
    def lipschitz(self) -> Optional[float]:
        """G: function Lipschitz constant on the working domain, if finite"""
        return None

    @property
    @abstractmethod
    def minimizer(self) -> np.ndarray:
        """x*"""

    @property
    def noise_dim(self) -> int:
        return self.dim

    # -- evaluation ----------------------------------------------------------

    @abstractmethod
    def values(self, X: np.ndarray) -> np.ndarray:
        """Noiseless f on each row of X"""

    @abstractmethod
    def noise_values(self, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """F(x_i, z_i) - f(x_i) for each row pair"""

    @abstractmethod
    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradient (or a subgradient) of f at x"""

    @abstractmethod
    def noise_gradient(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """grad_x F(x, z) - grad f(x)"""

    def noisy_values(self, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
        X = as_matrix(X, self.dim)
        Z = as_matrix(Z, self.noise_dim, "Z")
        if Z.shape[0] != X.shape[0]:
            raise UsageError(f"Got {X.shape[0]} points but {Z.shape[0]} noise values")
        return self.values(X) + self.noise_values(X, Z)

    def differences(self, x: np.ndarray, E: np.ndarray, t: float,
                    Z_plus: np.ndarray, Z_minus: np.ndarray) -> np.ndarray:
        """
        F(x + t e_i, Z+_i) - F(x - t e_i, Z-_i) for each direction row e_i

        Subclasses with closed-form structure override this to avoid the
        cancellation of subtracting two nearly equal values.
        """
        return self.noisy_values(x + t * E, Z_plus) - self.noisy_values(x - t * E, Z_minus)

    def value(self, x: np.ndarray) -> float:
        return float(self.values(as_matrix(x, self.dim))[0])

    def value_band(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Pointwise (min, max) of f over the problem's family; a single problem is its own family"""
        f = self.values(as_matrix(X, self.dim))
        return f, f

    def optimal_value(self) -> float:
        return self.value(self.minimizer)

    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(
            kind=self.kind,
            dim=self.dim,
            mu=self.strong_convexity,
            lips_grad=self.smoothness,
            lips_f=self.lipschitz,
            minimizer=tuple(float(v) for v in self.minimizer),
            params=self._spec_params(),
        )

    def _spec_params(self) -> Dict[str, Any]:
        return {}

    def check_point(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise UsageError(f"Point has shape {x.shape}, expected ({self.dim},)")
        return x


def eval_objective(problem: Problem, x: np.ndarray) -> float:
    """
    Noiseless objective f(x)

    Raises:
        UsageError: If len(x) != problem.dim
    """
    return problem.value(problem.check_point(x))


def initial_point(problem: Problem, initial_error: float, rng: np.random.Generator) -> np.ndarray:
    """Point x0 with ||x0 - x*||^2 = initial_error along a random direction"""
    if initial_error < 0:
        raise UsageError(f"initial_error must be >= 0, got {initial_error}")
    direction = rng.standard_normal(problem.dim)
    direction /= np.linalg.norm(direction)
    return problem.minimizer + np.sqrt(initial_error) * direction
