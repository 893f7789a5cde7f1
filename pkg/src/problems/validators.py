"""
Assumption validators for problem instances

Each check returns a result dict {'status', 'message', 'details'}; violations
are reported, never raised.
"""

from typing import Any, Dict, Optional

import numpy as np
from scipy import optimize

from ..errors import UsageError
from ..utils.logging_utils import get_logger
from .base import NoiseRegime, Problem
from .hard_instances import HardOnePoint

logger = get_logger(__name__)

# Relative slack for floating-point round-off in constant comparisons
_RTOL = 1e-9


def _sample_ball(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    directions = rng.standard_normal((n, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = rng.random(n) ** (1.0 / dim)
    return directions * radii[:, None]


def _result(ok: bool, message: str, details: Dict[str, Any], warn: bool = False) -> Dict[str, Any]:
    status = 'PASS' if ok else ('WARNING' if warn else 'FAIL')
    return {'status': status, 'message': message, 'details': details}


def check_strong_convexity(problem: Problem, X: np.ndarray, Y: np.ndarray) -> Dict[str, Any]:
    """Worst ratio 2(f(x) - f(y) - <grad f(y), x - y>) / ||x - y||^2 over pairs"""
    fx = problem.values(X)
    fy = problem.values(Y)
    grads = np.array([problem.gradient(y) for y in Y])
    diff = X - Y
    gap = fx - fy - np.einsum('ij,ij->i', grads, diff)
    ratios = 2.0 * gap / np.maximum(np.sum(diff ** 2, axis=1), 1e-300)
    observed = float(ratios.min())
    declared = problem.strong_convexity
    ok = observed >= declared * (1 - _RTOL) - 1e-12
    return _result(ok, f"Strong convexity: observed {observed:.6g} vs declared mu={declared:.6g}",
                   {'observed_mu': observed, 'declared_mu': declared})


def check_smoothness(problem: Problem, X: np.ndarray, Y: np.ndarray) -> Dict[str, Any]:
    """Worst ||grad f(x) - grad f(y)|| / ||x - y|| over pairs"""
    declared = problem.smoothness
    if declared is None:
        return _result(True, "Smoothness: not applicable (non-smooth objective)", {'declared_L': None})
    gx = np.array([problem.gradient(x) for x in X])
    gy = np.array([problem.gradient(y) for y in Y])
    ratios = np.linalg.norm(gx - gy, axis=1) / np.maximum(np.linalg.norm(X - Y, axis=1), 1e-300)
    observed = float(ratios.max())
    ok = observed <= declared * (1 + _RTOL) + 1e-12
    return _result(ok, f"Gradient Lipschitz: observed {observed:.6g} vs declared L={declared:.6g}",
                   {'observed_L': observed, 'declared_L': declared})


def check_lipschitz(problem: Problem, X: np.ndarray, Y: np.ndarray) -> Dict[str, Any]:
    declared = problem.lipschitz
    if declared is None:
        return _result(True, "Function Lipschitz: not declared", {'declared_G': None})
    ratios = np.abs(problem.values(X) - problem.values(Y)) / np.maximum(np.linalg.norm(X - Y, axis=1), 1e-300)
    observed = float(ratios.max())
    ok = observed <= declared * (1 + _RTOL) + 1e-12
    return _result(ok, f"Function Lipschitz: observed {observed:.6g} vs declared G={declared:.6g}",
                   {'observed_G': observed, 'declared_G': declared})


def check_minimizer(problem: Problem, X: np.ndarray) -> Dict[str, Any]:
    f_star = problem.optimal_value()
    worst = float((problem.values(X) - f_star).min())
    ok = worst >= -1e-12
    return _result(ok, f"Minimizer: min_x f(x) - f(x*) = {worst:.3e} over sampled points",
                   {'f_star': f_star, 'worst_gap': worst})


def check_noise(problem: Problem, X: np.ndarray, noise_std: float, noise_draws: int,
                rng: np.random.Generator) -> Dict[str, Any]:
    """
    Second moments of F - f and grad F - grad f under the stationary law

    Gaussian noise has no uniform bound; under the SecondMoment regime that
    is reported as a WARNING rather than a failure.
    """
    sigma1_sq = np.empty(len(X))
    sigma2_sq = np.empty(len(X))
    max_abs = 0.0
    for i, x in enumerate(X):
        Z = rng.standard_normal((noise_draws, problem.noise_dim)) * noise_std
        deviations = problem.noise_values(np.broadcast_to(x, (noise_draws, problem.dim)), Z)
        sigma1_sq[i] = float(np.mean(deviations ** 2))
        max_abs = max(max_abs, float(np.abs(deviations).max()))
        grads = np.array([problem.noise_gradient(x, z) for z in Z[: min(noise_draws, 256)]])
        sigma2_sq[i] = float(np.mean(np.sum(grads ** 2, axis=1)))

    details = {
        'sigma1_sq_worst': float(sigma1_sq.max()),
        'sigma1_sq_mean': float(sigma1_sq.mean()),
        'sigma2_sq_worst': float(sigma2_sq.max()),
        'max_abs_deviation': max_abs,
        'noise_regime': problem.noise_regime.value,
        'per_point_sigma1_sq': sigma1_sq.tolist(),
    }
    if problem.noise_regime is NoiseRegime.SECOND_MOMENT and noise_std > 0:
        return _result(
            False,
            f"Noise: second moments bounded (sigma1^2 <= {details['sigma1_sq_worst']:.4g}, "
            f"sigma2^2 <= {details['sigma2_sq_worst']:.4g}); uniform bound fails for unbounded Gaussian noise",
            details,
            warn=True,
        )
    return _result(True, f"Noise: |F - f| <= {max_abs:.4g} on all draws", details)


def numerical_minimizer(problem: Problem, x0: Optional[np.ndarray] = None, gtol: float = 1e-12) -> np.ndarray:
    """BFGS minimisation of the noiseless f with its analytic gradient, started at x0 (default 0)"""
    x0 = np.zeros(problem.dim) if x0 is None else problem.check_point(x0)
    result = optimize.minimize(problem.value, x0, jac=problem.gradient, method="BFGS",
                               options={"gtol": gtol, "maxiter": 10000})
    if not result.success:
        logger.debug(f"BFGS stopped early on {problem.kind.value}: {result.message}")
    return np.asarray(result.x, dtype=float)


def check_minimizer_numeric(problem: Problem, tolerance: float = 1e-6) -> Dict[str, Any]:
    """Declared minimiser against a numerical one, per coordinate"""
    x_hat = numerical_minimizer(problem)
    gap = float(np.max(np.abs(x_hat - problem.minimizer)))
    return _result(gap <= tolerance,
                   f"Numerical minimiser within {gap:.2e} of the declared x* (tolerance {tolerance:g})",
                   {'max_gap': gap, 'numerical': x_hat.tolist()})


def check_hessian_range(problem: HardOnePoint, X: np.ndarray) -> Dict[str, Any]:
    """Diagonal Hessian entries of f_w must lie in [mu/2, 3mu/2]"""
    entries = np.concatenate([problem.hessian_diagonal(x) for x in X])
    low, high = float(entries.min()), float(entries.max())
    ok = low >= 0.5 * problem.mu - 1e-12 and high <= 1.5 * problem.mu + 1e-12
    return _result(ok, f"Hessian eigenvalues in [{low:.4g}, {high:.4g}] (allowed "
                       f"[{0.5 * problem.mu:.4g}, {1.5 * problem.mu:.4g}])",
                   {'min_eigenvalue': low, 'max_eigenvalue': high})


def validate_assumptions(
    problem: Problem,
    samples: int = 200,
    seed: int = 0,
    noise_std: Optional[float] = None,
    noise_draws: int = 2000,
) -> Dict[str, Dict[str, Any]]:
    """
    Run all assumption checks on `samples` random point pairs in the unit ball

    Args:
        problem: Problem instance
        samples: Number of sampled pairs (>= 2)
        seed: Seed for point and noise sampling
        noise_std: Per-coordinate std of the stationary noise; noise checks
            are skipped when None
        noise_draws: Noise draws per point for the moment estimates

    Returns:
        Dictionary of validation results
    """
    if samples < 2:
        raise UsageError(f"samples must be >= 2, got {samples}")
    rng = np.random.default_rng(seed)
    X = _sample_ball(samples, problem.dim, rng)
    Y = _sample_ball(samples, problem.dim, rng)

    results = {
        'strong_convexity': check_strong_convexity(problem, X, Y),
        'smoothness': check_smoothness(problem, X, Y),
        'lipschitz': check_lipschitz(problem, X, Y),
        'minimizer': check_minimizer(problem, X),
        'numerical_minimizer': check_minimizer_numeric(problem),
    }
    if isinstance(problem, HardOnePoint):
        results['hessian_range'] = check_hessian_range(problem, X)
    if noise_std is not None:
        n_points = min(samples, 20)
        results['noise'] = check_noise(problem, X[:n_points], noise_std, noise_draws, rng)

    n_fail = sum(1 for r in results.values() if r['status'] == 'FAIL')
    logger.info(f"Assumption checks for {problem.kind.value} (d={problem.dim}): "
                f"{len(results) - n_fail}/{len(results)} without failures")
    return results
