"""
Monte-Carlo checks of the estimator, smoothing and noise-chain bounds

The variance bounds carry unknown universal constants, so scaling checks compare
fitted log-log exponents; exactness checks compare against closed forms
within k standard errors (k = 3 for scalars, 4 componentwise).
"""

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..chains.lazy_chain import ChainParams, new_chain, new_chain_from, trajectory
from ..chains.mixing import assumption_mixing_time, coupling_survival, mixing_time_agreement
from ..errors import DivergenceError, UsageError
from ..estimators.finite_difference import Feedback, SmoothingConfig, directional_samples
from ..estimators.mlmc import MlmcConfig, expected_oracle_calls, mlmc_estimate
from ..estimators.sampling import LevelLaw, level_probability, sample_ball_batch, sample_sphere_batch
from ..estimators.strategies import GradientEstimator, MlmcEstimator, RandomDirectionEstimator
from ..optimizer.accelerated import RunRecord, run
from ..optimizer.tuning import run_with_restarts, tune_theorem
from ..problems.base import Problem
from ..problems.oracle import AdversarialSpec, Oracle, as_oracle
from ..problems.quadratics import LinearNoiseQuadratic, QuadraticMarkov
from ..utils.logging_utils import get_logger, with_log_level
from .moments import MomentReport, fit_loglog_slope, standard_error, variance_with_se, within_se

logger = get_logger(__name__)
restart_logger = get_logger(run_with_restarts.__module__)

# Variances below this are treated as exactly zero
_ZERO_VARIANCE = 1e-28


def _default_point(problem: Problem, x: Optional[np.ndarray]) -> np.ndarray:
    if x is None:
        return problem.minimizer + np.ones(problem.dim) / np.sqrt(problem.dim)
    return problem.check_point(x)


def smoothed_gradient(problem: Problem, x: np.ndarray, t: float, samples: int = 20000,
                      rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    grad f_t(x) of the ball-smoothed objective

    Exact on linear-noise quadratics, where grad f_t = grad f; otherwise
    central differences of f_t with step t/4 over one shared set of ball points.
    """
    if isinstance(problem, LinearNoiseQuadratic):
        return problem.gradient(x)
    rng = np.random.default_rng(0) if rng is None else rng
    h = t / 4.0
    V = sample_ball_batch(samples, problem.dim, rng)
    return np.array([
        (problem.values(x + h * e_i + t * V).mean() - problem.values(x - h * e_i + t * V).mean()) / (2 * h)
        for e_i in np.eye(problem.dim)
    ])


# ============================================================================
# Markov noise
# ============================================================================

def batched_noise_means(problem: Problem, x: np.ndarray, chain_params: ChainParams, n: int,
                        reps: int, seed: int = 0) -> np.ndarray:
    """(1/n) sum_i (F(x, Z_i) - f(x)) over n consecutive chain values, per replication"""
    X = np.broadcast_to(x, (n, problem.dim))
    means = np.empty(reps)
    children = np.random.SeedSequence([seed, chain_params.tau_hold, n]).spawn(reps)
    for i, child in enumerate(children):
        Z, _ = trajectory(new_chain(chain_params, child), n)
        means[i] = problem.noise_values(X, Z).mean()
    return means


def check_markov_variance(
    problem: Problem,
    x: Optional[np.ndarray] = None,
    n_grid: Sequence[int] = (16, 32, 64, 128, 256),
    tau_grid: Sequence[int] = (1, 4, 16, 64),
    reps: int = 1000,
    noise_std: float = 1.0,
    n_fixed: int = 256,
    seed: int = 0,
    n_tolerance: float = 0.15,
    tau_tolerance: float = 0.2,
) -> MomentReport:
    """
    Variance of batched noise means against n (at tau = 1) and tau (at n_fixed)

    The expected exponents are -1 in n and +1 in tau. The fitted constant
    var * n / (tau * s^2 ||x||^2) is reported, never checked.

    Raises:
        UsageError: If reps < 100
    """
    if reps < 100:
        raise UsageError(f"check_markov_variance needs reps >= 100, got {reps}")
    x = _default_point(problem, x)
    report = MomentReport(name='markov_variance', replications=reps)

    def measure(axis: str, tau: int, n: int) -> float:
        params = ChainParams(dim=problem.noise_dim, tau_hold=tau, noise_std=noise_std)
        variance, se = variance_with_se(batched_noise_means(problem, x, params, n, reps, seed))
        report.rows.append({'axis': axis, 'n': n, 'tau': tau, 'variance': variance, 'se': se})
        return variance

    var_n = [measure('n', 1, n) for n in n_grid]
    var_tau = [measure('tau', tau, n_fixed) for tau in tau_grid]

    if max(var_n + var_tau) <= _ZERO_VARIANCE:
        report.add_check('zero_noise', True, "Noise-free chain: batched means have zero variance",
                         value=max(var_n + var_tau), expected=0.0)
        return report

    sigma_sq = noise_std ** 2 * float(x @ x)
    report.slopes['C1'] = max(row['variance'] * row['n'] / (row['tau'] * sigma_sq) for row in report.rows)

    fit_n = fit_loglog_slope(n_grid, var_n)
    fit_tau = fit_loglog_slope(tau_grid, var_tau)
    report.slopes['n'] = fit_n['slope']
    report.slopes['tau'] = fit_tau['slope']
    report.add_check('slope_n', abs(fit_n['slope'] + 1.0) <= n_tolerance,
                     f"Variance slope in n: {fit_n['slope']:.3f} (expected -1 +/- {n_tolerance})",
                     value=fit_n['slope'], expected=-1.0)
    report.add_check('slope_tau', abs(fit_tau['slope'] - 1.0) <= tau_tolerance,
                     f"Variance slope in tau: {fit_tau['slope']:.3f} (expected +1 +/- {tau_tolerance})",
                     value=fit_tau['slope'], expected=1.0)
    return report


# ============================================================================
# Smoothing
# ============================================================================

def _ball_gaps(problem: Problem, X: np.ndarray, t: float, U: np.ndarray) -> np.ndarray:
    """(f(x + tU) + f(x - tU)) / 2 - f(x) for every point row and ball sample"""
    n_points, m = X.shape[0], U.shape[0]
    shifted = X[:, None, :] + t * U[None, :, :]
    mirrored = X[:, None, :] - t * U[None, :, :]
    plus = problem.values(shifted.reshape(-1, problem.dim)).reshape(n_points, m)
    minus = problem.values(mirrored.reshape(-1, problem.dim)).reshape(n_points, m)
    return 0.5 * (plus + minus) - problem.values(X)[:, None]


def check_smoothing(
    problem: Problem,
    x: Optional[np.ndarray],
    t: float,
    mc_samples: int = 20000,
    seed: int = 0,
    n_points: int = 0,
    point_samples: int = 200,
) -> MomentReport:
    """
    Properties of the ball-smoothed function f_t(x) = E_U f(x + tU)

    Checks f_t >= f, f_t <= f + L t^2 (smooth) or f + G t (Lipschitz), the
    ball moment E||U||^2 = d/(d+2), the closed form t^2 tr(A)/(2(d+2)) of
    f_t - f on quadratics, and E_e[g(x)] = grad f_t(x). With n_points > 0
    the Lipschitz band 0 <= f_t - f <= G t is checked on sampled points.

    The gap is estimated with antithetic pairs, whose samples lie in the
    band pointwise for convex Lipschitz f.
    """
    if t <= 0:
        raise UsageError(f"Smoothing radius must be positive, got {t}")
    d = problem.dim
    x = _default_point(problem, x)
    rng = np.random.default_rng(seed)
    report = MomentReport(name=f'smoothing_d{d}_t{t:g}', replications=mc_samples)

    U = sample_ball_batch(mc_samples, d, rng)
    gaps = _ball_gaps(problem, x[None, :], t, U)[0]
    gap, gap_se = float(gaps.mean()), float(standard_error(gaps))
    report.mean = np.array([gap])
    report.standard_error = np.array([gap_se])
    report.rows.append({'d': d, 't': t, 'f_t_minus_f': gap, 'se': gap_se})

    radii_sq = np.sum(U ** 2, axis=1)
    moment, moment_se = float(radii_sq.mean()), float(standard_error(radii_sq))
    report.add_check(f'ball_moment_d{d}', within_se(moment, d / (d + 2), moment_se),
                     f"E||U||^2 = {moment:.5f} vs d/(d+2) = {d / (d + 2):.5f} (se {moment_se:.1e})",
                     value=moment, expected=d / (d + 2))

    report.add_check('f_t_ge_f', gap >= -3 * gap_se, f"f_t - f = {gap:.4e} >= 0", value=gap, expected=0.0)
    if problem.smoothness is not None:
        upper = problem.smoothness * t ** 2
        report.add_check('f_t_le_f_plus_Lt2', gap <= upper + 3 * gap_se,
                         f"f_t - f = {gap:.4e} <= L t^2 = {upper:.4e}", value=gap, expected=upper)
    if problem.lipschitz is not None:
        upper = problem.lipschitz * t
        report.add_check('f_t_le_f_plus_Gt', gap <= upper + 3 * gap_se,
                         f"f_t - f = {gap:.4e} <= G t = {upper:.4e}", value=gap, expected=upper)

    exact_gradient = isinstance(problem, LinearNoiseQuadratic)
    if exact_gradient:
        expected = t ** 2 * float(problem.eigenvalues.sum()) / (2.0 * (d + 2))
        report.add_check('f_t_minus_f', within_se(gap, expected, gap_se),
                         f"f_t - f = {gap:.5e} vs t^2 tr(A)/(2(d+2)) = {expected:.5e} (se {gap_se:.1e})",
                         value=gap, expected=expected)

    # E_e[g] against grad f_t: exact for quadratics, common-random-number differences otherwise
    E = sample_sphere_batch(mc_samples, d, rng)
    slopes = (problem.values(x + t * E) - problem.values(x - t * E)) / (2.0 * t)
    G = d * slopes[:, None] * E
    g_mean, g_se = G.mean(axis=0), standard_error(G)
    reference = smoothed_gradient(problem, x, t, mc_samples, rng)
    report.add_check('grad_unbiased', within_se(g_mean, reference, g_se, k=4.0),
                     f"max |E_e[g] - grad f_t| = {np.max(np.abs(g_mean - reference)):.3e}",
                     warn=not exact_gradient,
                     value=float(np.max(np.abs(g_mean - reference))), expected=0.0)

    if problem.smoothness is not None:
        deviation = float(np.linalg.norm(problem.gradient(x) - g_mean))
        bound = problem.smoothness * t + 4.0 * float(np.linalg.norm(g_se))
        report.add_check('grad_deviation', deviation <= bound,
                         f"||grad f - grad f_t|| = {deviation:.3e} <= L t = {problem.smoothness * t:.3e}",
                         value=deviation, expected=problem.smoothness * t)

    if n_points > 0:
        if problem.lipschitz is None:
            raise UsageError("The pointwise band check needs a Lipschitz objective")
        radius = max(getattr(problem, 'radius', 1.0) - t, 0.0)
        X = problem.minimizer + radius * sample_ball_batch(n_points, d, rng)
        point_gaps = _ball_gaps(problem, X, t, sample_ball_batch(point_samples, d, rng)).mean(axis=1)
        upper = problem.lipschitz * t
        slack = 1e-12 * (1.0 + np.abs(problem.values(X)))
        ok = bool(np.all(point_gaps >= -slack) and np.all(point_gaps <= upper + slack))
        report.add_check('pointwise_band', ok,
                         f"0 <= f_t - f <= G t on {n_points} points "
                         f"(range [{point_gaps.min():.3e}, {point_gaps.max():.3e}], G t = {upper:.3e})",
                         value=float(point_gaps.max()), expected=upper)
    return report


# ============================================================================
# Estimator moments
# ============================================================================

def estimator_samples(
    target: Problem | Oracle,
    chain_params: ChainParams,
    x: np.ndarray,
    estimator: GradientEstimator,
    reps: int,
    seed: int = 0,
    start: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Independent estimates at x, each on a fresh chain

    Args:
        start: Fixed chain value Z_0; stationary starts when omitted

    Returns:
        (estimates (reps, d), oracle calls (reps,), levels (reps,))
    """
    oracle = as_oracle(target)
    estimates = np.empty((reps, oracle.dim))
    calls = np.empty(reps, dtype=np.int64)
    levels = np.empty(reps, dtype=np.int64)
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(reps)):
        chain_seq, estimator_seq = child.spawn(2)
        chain = (new_chain(chain_params, chain_seq) if start is None
                 else new_chain_from(chain_params, start, chain_seq))
        estimate, _ = estimator(oracle, chain, x, np.random.default_rng(estimator_seq))
        estimates[i] = estimate.vector
        calls[i] = estimate.oracle_calls
        levels[i] = estimate.level_j
    return estimates, calls, levels


def closed_form_mlmc_mean(
    problem: LinearNoiseQuadratic,
    x: np.ndarray,
    start: np.ndarray,
    cfg: MlmcConfig,
    smoothing: SmoothingConfig,
    tau: int,
) -> np.ndarray:
    """
    Exact E[g_ml(x)] on a linear-noise quadratic with the chain started at Z_0

    A single estimate has conditional mean grad f(x) + (Z+ + Z-)/2, and
    E[Z_k | Z_0] = (1 - 1/tau)^k Z_0. Samples are laid out as in
    mlmc_estimate: base samples 0..l-1, then the level-j block.
    """
    if not isinstance(problem, LinearNoiseQuadratic):
        raise UsageError(f"No closed form for {type(problem).__name__}")
    if cfg.j_max is None:
        raise UsageError("The closed form needs a finite batch limit M")
    rho = 1.0 - 1.0 / tau

    def mean_weight(first: int, n: int) -> float:
        i = np.arange(first, first + n, dtype=float)
        if smoothing.feedback is Feedback.TWO_POINT:
            return float(np.mean(rho ** i))
        return float(np.mean(0.5 * (rho ** (2 * i) + rho ** (2 * i + 1))))

    l = cfg.l
    weight = mean_weight(0, l)
    for j in range(1, cfg.j_max + 1):
        weight += level_probability(j, cfg.law) * 2.0 ** j * (
            mean_weight(l, 2 ** j * l) - mean_weight(l, 2 ** (j - 1) * l)
        )
    return problem.gradient(x) + weight * np.asarray(start, dtype=float)


def check_mlmc_moments(
    problem: Problem,
    x: Optional[np.ndarray],
    cfg: MlmcConfig,
    smoothing: SmoothingConfig,
    chain_params: ChainParams,
    reps: int = 1000,
    seed: int = 0,
    start: Optional[np.ndarray] = None,
) -> MomentReport:
    """
    Mean squared error and bias of the MLMC estimator at x

    With a stationary chain the mean is compared to grad f_t; with a fixed
    start on a linear-noise quadratic it is compared to closed_form_mlmc_mean.

    Raises:
        UsageError: If reps < 1000
    """
    if reps < 1000:
        raise UsageError(f"check_mlmc_moments needs reps >= 1000, got {reps}")
    x = _default_point(problem, x)
    estimates, calls, _ = estimator_samples(problem, chain_params, x, MlmcEstimator(cfg, smoothing),
                                            reps, seed, start)
    exact_target = isinstance(problem, LinearNoiseQuadratic)
    target = smoothed_gradient(problem, x, smoothing.t, rng=np.random.default_rng([seed, 1]))
    mean, se = estimates.mean(axis=0), standard_error(estimates)
    mse = float(np.mean(np.sum((estimates - target) ** 2, axis=1)))
    bias_sq = float(np.sum((mean - target) ** 2))

    report = MomentReport(name='mlmc_moments', mean=mean, second_moment=mse, standard_error=se,
                          replications=reps)
    report.rows.append({'d': problem.dim, 'tau': chain_params.tau_hold, 'B': cfg.B, 'M': cfg.M, 'l': cfg.l,
                        'mse': mse, 'bias_sq': bias_sq, 'mean_calls': float(calls.mean())})

    expected_calls = expected_oracle_calls(cfg)
    report.add_check('mean_calls', within_se(calls.mean(), expected_calls, standard_error(calls), floor=1e-9),
                     f"Mean oracle calls {calls.mean():.3f} vs closed form {expected_calls:.3f}",
                     value=float(calls.mean()), expected=expected_calls)

    if start is None:
        # the Monte-Carlo grad f_t of non-quadratic problems carries its own error: warn only
        report.add_check('unbiased', within_se(mean, target, se, k=4.0, floor=1e-12),
                         f"max |mean - grad f_t| = {np.max(np.abs(mean - target)):.3e} "
                         f"(max se {np.max(se):.1e})",
                         warn=not exact_target,
                         value=float(np.max(np.abs(mean - target))), expected=0.0)
    else:
        reference = closed_form_mlmc_mean(problem, x, start, cfg, smoothing, chain_params.tau_hold)
        report.add_check('closed_form_mean', within_se(mean, reference, se, k=4.0, floor=1e-12),
                         f"max |mean - closed form| = {np.max(np.abs(mean - reference)):.3e} "
                         f"(max se {np.max(se):.1e})",
                         value=float(np.max(np.abs(mean - reference))), expected=0.0)
    return report


def check_telescoping(
    problem: Problem,
    x: Optional[np.ndarray],
    cfg: MlmcConfig,
    smoothing: SmoothingConfig,
    chain_params: ChainParams,
    reps: int = 10000,
    seed: int = 0,
) -> MomentReport:
    """
    Mean of g_ml against the mean of the top-level estimator g_rd[2^j_max l]

    Both are sampled from stationary chains on independent seeds and
    compared componentwise within 4 standard errors of the difference.
    """
    x = _default_point(problem, x)
    top = RandomDirectionEstimator(n=2 ** cfg.j_max * cfg.l, smoothing=smoothing)
    ml, _, _ = estimator_samples(problem, chain_params, x, MlmcEstimator(cfg, smoothing), reps, seed)
    rd, _, _ = estimator_samples(problem, chain_params, x, top, reps, seed + 1)
    gap = ml.mean(axis=0) - rd.mean(axis=0)
    se = np.sqrt(standard_error(ml) ** 2 + standard_error(rd) ** 2)

    report = MomentReport(name='mlmc_telescoping', mean=gap, standard_error=se, replications=reps)
    report.add_check('telescoping', within_se(gap, 0.0, se, k=4.0, floor=1e-12),
                     f"max |E g_ml - E g_rd[{top.n}]| = {np.max(np.abs(gap)):.3e} (max se {np.max(se):.1e})",
                     value=float(np.max(np.abs(gap))), expected=0.0)
    return report


def mlmc_variance_sweep(
    problems: Sequence[Problem],
    configs: Sequence[MlmcConfig],
    axis_values: Sequence[float],
    smoothing: SmoothingConfig,
    chain_params: Sequence[ChainParams],
    reps: int = 1000,
    seed: int = 0,
) -> Tuple[List[float], dict]:
    """E||g_ml - grad f||^2 at each sweep point, with its log-log fit against `axis_values`"""
    variances = []
    for problem, cfg, params in zip(problems, configs, chain_params):
        x = _default_point(problem, None)
        estimates, _, _ = estimator_samples(problem, params, x, MlmcEstimator(cfg, smoothing), reps, seed)
        variances.append(float(np.mean(np.sum((estimates - problem.gradient(x)) ** 2, axis=1))))
    return variances, fit_loglog_slope(axis_values, variances)


# ============================================================================
# Adversarial noise
# ============================================================================

def check_adversarial_floor(
    problem: Problem,
    delta_fractions: Iterable[float] = (0.0, 0.5, 1.0, 100.0),
    epsilon: float = 1e-4,
    chain_params: Optional[ChainParams] = None,
    N: int = 200,
    reps: int = 20,
    evaluations: int = 10000,
    perturbation: str = 'sign_flip',
    B: int = 1,
    seed: int = 0,
) -> MomentReport:
    """
    Robustness to a bounded deterministic perturbation Delta(x)

    Per estimate, ||g - g_clean|| <= d Delta / t is checked on `evaluations`
    random (x, e, Z) triples evaluated with and without the perturbation.
    End to end, the theorem-tuned method is run at Delta = fraction *
    delta_max on paired seeds; the final error must stay within twice the
    unperturbed error for fractions <= 1.
    """
    fractions = sorted(set(float(f) for f in delta_fractions) | {0.0})
    d = problem.dim
    if chain_params is None:
        chain_params = ChainParams(dim=problem.noise_dim, tau_hold=4, noise_std=0.1)
    tuning = tune_theorem(problem, epsilon, B=B, feedback=Feedback.TWO_POINT)
    t, delta_max = tuning.t, tuning.delta_max
    smoothing = SmoothingConfig(t=t, feedback=Feedback.TWO_POINT)
    clean = as_oracle(problem)
    report = MomentReport(name='adversarial_floor', replications=reps)

    rng = np.random.default_rng(seed)
    X = problem.minimizer + 0.1 * sample_ball_batch(evaluations, d, rng)
    E = sample_sphere_batch(evaluations, d, rng)
    Z, _ = trajectory(new_chain(chain_params, seed), evaluations)

    # Delta = 0 and constant Delta leave the estimates bit-identical
    chain = new_chain(chain_params, seed)
    reference, _ = directional_samples(clean, chain, X[0], E, smoothing)
    for label, spec in (('zero', AdversarialSpec(0.0, perturbation)),
                        ('constant', AdversarialSpec(delta_max, 'constant'))):
        wrapped, _ = directional_samples(clean.with_adversary(spec), chain, X[0], E, smoothing)
        report.add_check(f'identity_{label}', np.array_equal(wrapped, reference),
                         f"{label} perturbation leaves estimates unchanged")

    for fraction in fractions[1:]:
        delta = fraction * delta_max
        noisy = clean.with_adversary(AdversarialSpec(delta, perturbation))
        shift = ((noisy.values(X + t * E, Z) - noisy.values(X - t * E, Z))
                 - (clean.values(X + t * E, Z) - clean.values(X - t * E, Z)))
        gap = float(np.max(np.abs(d * shift / (2.0 * t))))
        bound = d * delta / t
        report.add_check(f'per_estimate_bound_{fraction:g}', gap <= bound * (1 + 1e-9) + 1e-12,
                         f"max ||g - g_clean|| = {gap:.4e} <= d Delta / t = {bound:.4e}",
                         value=gap, expected=bound)

    params = tuning.to_params(N)
    rep_seeds = [np.random.SeedSequence([seed, rep]) for rep in range(reps)]
    errors = {}
    for fraction in fractions:
        oracle = clean.with_adversary(AdversarialSpec(fraction * delta_max, perturbation))
        finals = []
        for rep_seed in rep_seeds:
            try:
                finals.append(run(oracle, chain_params, params, rep_seed).final_error)
            except DivergenceError as exc:
                logger.warning(f"Delta fraction {fraction:g}: run diverged at iteration {exc.iteration}")
                finals.append(np.nan)
        finals = np.array(finals)
        errors[fraction] = float(finals.mean())
        report.rows.append({'fraction': fraction, 'delta': fraction * delta_max, 'mean_error': errors[fraction],
                            'se_error': float(standard_error(finals)) if reps > 1 else np.nan})

    baseline = errors[0.0]
    for fraction in fractions[1:]:
        ratio = errors[fraction] / baseline if baseline > 0 else np.inf
        if fraction <= 1.0:
            report.add_check(f'end_to_end_{fraction:g}', bool(ratio <= 2.0),
                             f"Delta = {fraction:g} delta_max: error ratio {ratio:.3f} (must be <= 2)",
                             value=ratio, expected=1.0)
        else:
            report.add_check(f'degrades_{fraction:g}', bool(ratio > 1.0),
                             f"Delta = {fraction:g} delta_max: error ratio {ratio:.3f}",
                             warn=True, value=ratio, expected=1.0)
    return report


# ============================================================================
# Oracle calls
# ============================================================================

def oracle_call_stats(
    records: Sequence[RunRecord],
    expected_per_iteration: Optional[float] = None,
    alphas: Sequence[float] = (1.5, 2.0, 3.0),
) -> MomentReport:
    """
    Distribution of per-iteration oracle calls and of the run totals S_N

    Reports the empirical tails P(S_N > alpha E S_N). When a closed-form
    per-iteration expectation is given, the empirical mean must match it
    within 3 standard errors.
    """
    if not records:
        raise UsageError("oracle_call_stats needs at least one record")
    per_iteration = np.concatenate([np.diff(r.oracle_calls_cum) for r in records]).astype(float)
    totals = np.array([r.oracle_calls_cum[-1] - r.oracle_calls_cum[0] for r in records], dtype=float)
    mean_total = totals.mean()

    se = float(standard_error(per_iteration)) if per_iteration.size > 1 else 0.0
    report = MomentReport(
        name='oracle_calls',
        mean=np.array([per_iteration.mean()]) if per_iteration.size else np.array([0.0]),
        second_moment=float(np.mean(per_iteration ** 2)) if per_iteration.size else 0.0,
        standard_error=np.array([se]),
        replications=len(records),
    )

    tails = []
    for alpha in alphas:
        tail = float(np.mean(totals > alpha * mean_total)) if mean_total > 0 else 0.0
        tails.append(tail)
        report.rows.append({'alpha': alpha, 'tail': tail, 'mean_total': mean_total})
    report.add_check('tail_monotone', all(a >= b for a, b in zip(tails, tails[1:])),
                     f"Tails P(S_N > alpha E S_N) = {tails} non-increasing in alpha")

    variance = float(per_iteration.var()) if per_iteration.size else 0.0
    report.add_check('variance', True, f"Per-iteration call variance {variance:.4g}", value=variance)

    if expected_per_iteration is not None and per_iteration.size:
        observed = float(per_iteration.mean())
        report.add_check('closed_form_calls', within_se(observed, expected_per_iteration, se, floor=1e-9),
                         f"Mean calls per iteration {observed:.3f} vs closed form {expected_per_iteration:.3f}",
                         value=observed, expected=expected_per_iteration)
    return report


# ============================================================================
# Oracle complexity
# ============================================================================

def oracle_complexity_sweep(
    problem: Problem,
    chain_params: ChainParams,
    B_values: Sequence[int],
    epsilon: float,
    reps: int = 4,
    seed: int = 0,
    feedback: Feedback = Feedback.TWO_POINT,
    max_rounds: int = 20,
) -> pd.DataFrame:
    """
    Iterations and oracle calls of restarted runs to reach epsilon, per B

    The counts are taken at the first iterate with ||x^k - x*||^2 <= epsilon,
    so the unused tail of the last restart round is not charged. Runs that
    never reach epsilon contribute their totals.

    Returns:
        DataFrame with columns B, mean_iterations, mean_oracle_calls,
        mean_round_iterations, mean_round_oracle_calls, mean_final_error,
        completion_rate, predicted_iterations, predicted_oracle_calls
    """
    sigma_sq = chain_params.dim * chain_params.noise_std ** 2
    rows = []
    for B in B_values:
        tuning = tune_theorem(problem, epsilon, B=B, feedback=feedback, tau=chain_params.tau_hold,
                              sigma_sq=sigma_sq)
        base = tuning.to_params(N=1)
        hits, hit_calls, iterations, calls, finals, complete = [], [], [], [], [], []
        with with_log_level(restart_logger, logging.INFO):
            for rep in range(reps):
                record = run_with_restarts(problem, chain_params, base, epsilon,
                                           seed=np.random.SeedSequence([seed, B, rep]), max_rounds=max_rounds)
                hit = record.first_hit(epsilon)
                hit = record.n_iterations if hit is None else hit
                hits.append(hit)
                hit_calls.append(int(record.oracle_calls_cum[hit]))
                iterations.append(record.n_iterations)
                calls.append(record.total_oracle_calls)
                finals.append(record.best_error)
                complete.append(record.complete)
        rows.append({
            'B': B,
            'mean_iterations': float(np.mean(hits)),
            'mean_oracle_calls': float(np.mean(hit_calls)),
            'mean_round_iterations': float(np.mean(iterations)),
            'mean_round_oracle_calls': float(np.mean(calls)),
            'mean_final_error': float(np.mean(finals)),
            'completion_rate': float(np.mean(complete)),
            'predicted_iterations': tuning.predicted_iterations,
            'predicted_oracle_calls': tuning.predicted_oracle_calls,
        })
        logger.info(f"B={B}: {rows[-1]['mean_iterations']:.1f} iterations, "
                    f"{rows[-1]['mean_oracle_calls']:.0f} oracle calls to epsilon")
    return pd.DataFrame(rows)


# ============================================================================
# Chains and single estimates
# ============================================================================

def check_mixing_time(tau_values: Sequence[int] = (1, 10, 100), trials: int = 2000, seed: int = 0,
                      tolerance: float = 0.25) -> MomentReport:
    """
    Closed-form mixing time against simulated coupling of two chains

    A tau fails when the simulated uncoupled fraction at k* disagrees with
    (1 - 1/tau)^k*, or when k* is not the first step below the tolerance.
    """
    report = MomentReport(name='mixing_time', replications=trials)
    for tau in tau_values:
        params = ChainParams(dim=2, tau_hold=tau)
        at = mixing_time_agreement(params, tolerance, trials, seed)
        k_star = at['k_star']
        ok = at['agrees'] and at['empirical'] <= tolerance + 3 * at['standard_error']
        if k_star > 1:
            before = coupling_survival(params, k_star - 1, trials, seed)
            ok = ok and before['empirical'] >= tolerance - 3 * before['standard_error']
        report.rows.append({'tau': tau, 'k_star': k_star, 'assumption_tau': assumption_mixing_time(params),
                            'survival': at['empirical'], 'expected': at['expected'], 'agrees': at['agrees']})
        report.add_check(f'mixing_tau{tau}', ok,
                         f"tau_hold={tau}: k*={k_star}, uncoupled fraction {at['empirical']:.4f} "
                         f"(closed form {at['expected']:.4f})",
                         value=at['empirical'], expected=at['expected'])
    return report


def check_quadratic_exactness(dim: int = 8, t_values: Sequence[float] = (1e-8, 1e-2, 1.0),
                              n_directions: int = 100, seed: int = 0, rtol: float = 1e-10) -> MomentReport:
    """
    Two-point estimates on (1/2)||x||^2 + <x, Z> equal d <x + Z, e> e

    Z is the chain value shared by the pair.
    """
    problem = QuadraticMarkov(dim)
    params = ChainParams(dim=dim, tau_hold=4, noise_std=1.0)
    rng = np.random.default_rng(seed)
    report = MomentReport(name='quadratic_exactness', replications=n_directions)

    for t in t_values:
        x = rng.standard_normal(dim)
        E = sample_sphere_batch(n_directions, dim, rng)
        chain = new_chain(params, int(rng.integers(2 ** 32)))
        G, _ = directional_samples(problem, chain, x, E, SmoothingConfig(t=t))
        Z, _ = trajectory(chain, n_directions)
        expected = dim * np.einsum('ij,ij->i', x + Z, E)[:, None] * E
        error = float(np.max(np.linalg.norm(G - expected, axis=1) / np.linalg.norm(expected, axis=1)))
        report.rows.append({'t': t, 'max_relative_error': error})
        report.add_check(f'exact_t{t:g}', error <= rtol,
                         f"t={t:g}: max relative error {error:.2e} (tolerance {rtol:g})",
                         value=error, expected=0.0)
    return report


def check_worked_example(draws: int = 40000, seed: int = 0, dim: int = 2,
                         tolerance: Optional[float] = None) -> MomentReport:
    """
    Outcome frequencies of the MLMC estimator with l = 1 and M = 2^60

    Under the worked-example level law the estimate is g1 with probability
    1/2 and g1 + (g3 - g2) with probability 1/4; the realised outcome is
    identified from the recorded per-sample estimates.

    Without an explicit tolerance each frequency is checked to 4 standard
    errors, sqrt(p (1 - p) / draws): about 0.01 at the default 40000 draws
    and 0.002 at 10^6.
    """
    problem = QuadraticMarkov(dim)
    cfg = MlmcConfig(B=1, M=2.0 ** 60, l=1, law=LevelLaw.WORKED_EXAMPLE)
    smoothing = SmoothingConfig(t=1e-2)
    params = ChainParams(dim=dim, tau_hold=4, noise_std=1.0)
    x = np.ones(dim) / np.sqrt(dim)

    counts = {1: 0, 3: 0}
    mismatch = 0.0
    for child in np.random.SeedSequence(seed).spawn(draws):
        chain_seq, estimator_seq = child.spawn(2)
        estimate, _ = mlmc_estimate(problem, new_chain(params, chain_seq), x, cfg, smoothing,
                                    np.random.default_rng(estimator_seq), record_samples=True)
        S = estimate.samples
        if estimate.n_samples == 1:
            expected = S[0]
        elif estimate.n_samples == 3:
            expected = S[0] + (S[2] - S[1])
        else:
            continue
        counts[estimate.n_samples] += 1
        scale = 1.0 + float(np.max(np.abs(expected)))
        mismatch = max(mismatch, float(np.max(np.abs(estimate.vector - expected))) / scale)

    report = MomentReport(name='worked_example', replications=draws)
    for n_samples, probability, label in ((1, 0.5, 'g1'), (3, 0.25, 'g1_plus_g3_minus_g2')):
        frequency = counts[n_samples] / draws
        band = 4.0 * math.sqrt(probability * (1.0 - probability) / draws) if tolerance is None else tolerance
        report.rows.append({'outcome': label, 'frequency': frequency, 'expected': probability,
                            'tolerance': band})
        report.add_check(f'frequency_{label}', abs(frequency - probability) <= band,
                         f"P({label}) = {frequency:.4f} vs {probability} +/- {band:.4f}",
                         value=frequency, expected=probability)
    report.add_check('outcome_values', mismatch <= 1e-12,
                     f"Estimates match their sample decomposition (max relative gap {mismatch:.1e})",
                     value=mismatch, expected=0.0)
    return report
