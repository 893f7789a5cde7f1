"""
Named verification suites

Each suite returns a list of MomentReports; a suite passes when none of its
checks has status 'FAIL'. Replication counts are the smallest that resolve
the stated tolerances at 3 standard errors.
"""

from typing import Callable, Dict, List

import numpy as np

from ..chains.lazy_chain import ChainParams
from ..errors import DivergenceError, UsageError
from ..estimators.finite_difference import SmoothingConfig
from ..estimators.mlmc import MlmcConfig, expected_oracle_calls
from ..estimators.strategies import ExactGradientEstimator
from ..optimizer.accelerated import run, run_gradient_descent
from ..optimizer.params import derive_params
from ..optimizer.tuning import predicted_iterations, run_with_restarts, tune_theorem
from ..problems.nonsmooth import NonsmoothL1
from ..problems.quadratics import DiagQuadratic, QuadraticMarkov
from ..utils.logging_utils import get_logger
from .checks import (
    check_adversarial_floor,
    check_markov_variance,
    check_mixing_time,
    check_mlmc_moments,
    check_quadratic_exactness,
    check_smoothing,
    check_telescoping,
    check_worked_example,
    closed_form_mlmc_mean,
    mlmc_variance_sweep,
    oracle_call_stats,
)
from .moments import MomentReport

logger = get_logger(__name__)


def chains_suite(seed: int = 0) -> List[MomentReport]:
    return [
        check_mixing_time(seed=seed),
        check_markov_variance(QuadraticMarkov(4), reps=1000, seed=seed),
    ]


def estimators_suite(seed: int = 0) -> List[MomentReport]:
    problem = QuadraticMarkov(4)
    params = derive_params(mu=1.0, lipschitz=1.0, gamma=0.075, t=1e-2, B=1, dim=4, N=2000)
    record = run(problem, ChainParams(dim=4, tau_hold=4, noise_std=0.1), params, seed)
    cfg = MlmcConfig.from_momentum(params)
    return [
        check_quadratic_exactness(seed=seed),
        check_worked_example(seed=seed),
        oracle_call_stats([record], expected_per_iteration=expected_oracle_calls(cfg)),
    ]


def smoothing_suite(seed: int = 0) -> List[MomentReport]:
    reports = [check_smoothing(QuadraticMarkov(d), None, t, seed=seed) for d in (2, 8) for t in (0.1, 1.0)]
    nonsmooth = NonsmoothL1(4)
    reports.append(check_smoothing(nonsmooth, np.full(4, 0.25), 0.1, seed=seed, n_points=1000))
    return reports


def mlmc_suite(seed: int = 0) -> List[MomentReport]:
    smoothing = SmoothingConfig(t=1e-2)
    reports = []

    # non-stationary start: sensitive to every weight of the telescoping sum
    problem = QuadraticMarkov(4)
    start = np.full(4, 4.0)
    cfg = MlmcConfig(B=1, M=8.0)
    reports.append(check_mlmc_moments(problem, np.zeros(4), cfg, smoothing,
                                      ChainParams(dim=4, tau_hold=32, noise_std=1.0),
                                      reps=20000, seed=seed, start=start))

    reports.append(check_telescoping(QuadraticMarkov(8), None, cfg, smoothing,
                                     ChainParams(dim=8, tau_hold=8, noise_std=1.0), reps=5000, seed=seed))

    noiseless = check_mlmc_moments(problem, None, cfg, smoothing,
                                   ChainParams(dim=4, tau_hold=8, noise_std=0.0), reps=2000, seed=seed)
    noiseless.name = 'mlmc_noiseless'
    reports.append(noiseless)

    scaling = MomentReport(name='mlmc_scaling')
    B_values = (1, 4, 16)
    variances, fit = mlmc_variance_sweep(
        [QuadraticMarkov(16)] * 3, [MlmcConfig(B=B, M=8.0) for B in B_values], B_values, smoothing,
        [ChainParams(dim=16, tau_hold=2, noise_std=1.0)] * 3, reps=2000, seed=seed,
    )
    scaling.slopes['B'] = fit['slope']
    scaling.rows.extend({'axis': 'B', 'value': B, 'mse': v} for B, v in zip(B_values, variances))
    scaling.add_check('variance_vs_B', abs(fit['slope'] + 1.0) <= 0.2,
                      f"MSE slope in B: {fit['slope']:.3f} (expected -1 +/- 0.2)", value=fit['slope'], expected=-1.0)

    d_values = (4, 8, 16, 32)
    variances, fit = mlmc_variance_sweep(
        [QuadraticMarkov(d) for d in d_values], [MlmcConfig(B=64, M=8.0)] * 4, d_values, smoothing,
        [ChainParams(dim=d, tau_hold=256, noise_std=1.0) for d in d_values], reps=500, seed=seed,
    )
    scaling.slopes['d'] = fit['slope']
    scaling.rows.extend({'axis': 'd', 'value': d, 'mse': v} for d, v in zip(d_values, variances))
    scaling.add_check('variance_vs_d', 0.5 <= fit['slope'] < 1.5,
                      f"MSE slope in d at tau=256: {fit['slope']:.3f} (linear, not quadratic)",
                      value=fit['slope'], expected=1.0)

    bias = {}
    for M in (4.0, 16.0):
        cfg_m = MlmcConfig(B=1, M=M)
        mean = closed_form_mlmc_mean(problem, np.zeros(4), start, cfg_m, smoothing, tau=64)
        bias[M] = float(np.sum(mean ** 2))
        scaling.rows.append({'axis': 'M', 'value': M, 'bias_sq': bias[M]})
    scaling.add_check('bias_vs_M', bias[16.0] < bias[4.0],
                      f"Bias ||E g_ml - grad f||^2: {bias[4.0]:.4g} (M=4) -> {bias[16.0]:.4g} (M=16)",
                      value=bias[16.0], expected=bias[4.0])
    reports.append(scaling)
    return reports


def optimizer_suite(seed: int = 0) -> List[MomentReport]:
    report = MomentReport(name='optimizer')
    noiseless = lambda d: ChainParams(dim=d, tau_hold=1, noise_std=0.0)

    # theorem-tuned zero-order run on a noiseless quadratic
    problem = DiagQuadratic(2, mu=0.1, L=1.0)
    tuning = tune_theorem(problem, 1e-8, B=32)
    try:
        record = run(problem, noiseless(2), tuning.to_params(N=1000), seed)
        final = record.final_error
    except DivergenceError as exc:
        final = np.inf
        logger.error(f"Deterministic run diverged at iteration {exc.iteration}")
    report.add_check('deterministic_convergence', final <= 1e-8,
                     f"||x^N - x*||^2 = {final:.3e} after 1000 iterations", value=final, expected=1e-8)

    exact = derive_params(mu=0.1, lipschitz=1.0, gamma=0.75, t=1e-4, p=1.0, dim=2, N=200)
    record = run(problem, noiseless(2), exact, seed, estimator=ExactGradientEstimator())
    lyapunov = record.lyapunov_proof[10:]
    increase = float(np.max(np.diff(lyapunov) / lyapunov[:-1]))
    report.add_check('lyapunov_monotone', increase <= 1e-12,
                     f"Largest relative Lyapunov increase after iteration 10: {increase:.2e}",
                     value=increase, expected=0.0)

    sphere = QuadraticMarkov(4)
    params = derive_params(mu=1.0, lipschitz=1.0, gamma=0.75, t=1e-4, p=1.0, dim=4, N=50)
    record = run(sphere, noiseless(4), params, seed, estimator=ExactGradientEstimator())
    norms = np.linalg.norm(record.x, axis=1)
    descent = np.linalg.norm(run_gradient_descent(sphere, record.x[0], 0.75, 50), axis=1)
    report.rows.append({'method': 'accelerated', 'final_norm': float(norms[-1])})
    report.rows.append({'method': 'gradient_descent', 'final_norm': float(descent[-1])})
    report.add_check('strict_decrease', bool(np.all(np.diff(norms) < 0)),
                     f"||x^k|| strictly decreasing over 50 iterations (final {norms[-1]:.3e}, "
                     f"gradient descent {descent[-1]:.3e})", value=float(norms[-1]))

    base = tuning.to_params(N=1)
    restarted = run_with_restarts(problem, noiseless(2), base, 1e-8, seed)
    rounds = len(restarted.round_starts)
    bound = predicted_iterations(0.1, 1.0, 2, 32, 1e-8)
    allowed = int(np.ceil(np.log2(bound))) + 1
    report.add_check('restart_rounds', restarted.complete and rounds <= allowed,
                     f"Restarts converged in {rounds} rounds (allowed {allowed}, complete={restarted.complete})",
                     value=rounds, expected=allowed)

    return [report, check_adversarial_floor(QuadraticMarkov(4), seed=seed)]


SUITES: Dict[str, Callable[[int], List[MomentReport]]] = {
    'chains': chains_suite,
    'estimators': estimators_suite,
    'smoothing': smoothing_suite,
    'mlmc': mlmc_suite,
    'optimizer': optimizer_suite,
}


def run_suite(name: str, seed: int = 0) -> List[MomentReport]:
    """
    Run one named suite, or every suite for 'all'

    Raises:
        UsageError: On an unknown suite name
    """
    if name == 'all':
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise UsageError(f"Unknown suite: {name} (available: {', '.join(list(SUITES) + ['all'])})")

    reports: List[MomentReport] = []
    for suite in names:
        logger.info(f"Running verification suite: {suite}")
        suite_reports = SUITES[suite](seed)
        for report in suite_reports:
            level = 'PASS' if report.passed else 'FAIL'
            logger.info(f"  {report.name}: {level} ({len(report.checks)} checks)")
        reports.extend(suite_reports)
    return reports
