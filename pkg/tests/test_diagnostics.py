"""
Tests for the statistics helpers, the moment checks and the verification suites
"""

import numpy as np
import pytest

from src.chains import ChainParams
from src.chains import mixing as mixing_module
from src.diagnostics import run_suite
from src.diagnostics.checks import (
    batched_noise_means,
    check_adversarial_floor,
    check_markov_variance,
    check_mixing_time,
    check_smoothing,
    oracle_call_stats,
    smoothed_gradient,
)
from src.diagnostics.moments import (
    MomentReport,
    fit_loglog_slope,
    standard_error,
    variance_with_se,
    within_se,
)
from src.errors import UsageError
from src.estimators import MlmcConfig, expected_oracle_calls
from src.optimizer import derive_params, run
from src.problems import NonsmoothL1, QuadraticMarkov


class TestStatistics:

    def test_within_se(self):
        assert within_se(1.0, 1.2, 0.1)
        assert not within_se(1.0, 1.4, 0.1)
        assert within_se(1.0, 1.4, 0.1, k=4.0, floor=1e-9)
        assert not within_se(np.array([0.0, 1.0]), np.zeros(2), np.array([1.0, 0.1]))

    def test_exact_slope(self):
        x = np.array([1.0, 2.0, 4.0, 8.0])
        fit = fit_loglog_slope(x, 3.0 * x ** -1.5)
        assert fit['slope'] == pytest.approx(-1.5)
        assert fit['intercept'] == pytest.approx(np.log(3.0))
        assert fit['r_squared'] == pytest.approx(1.0)

    @pytest.mark.parametrize("x,y", [([1.0], [1.0]), ([1.0, 2.0], [1.0]), ([0.0, 1.0], [1.0, 2.0]),
                                     ([1.0, 2.0], [-1.0, 2.0])])
    def test_slope_needs_positive_matched_points(self, x, y):
        with pytest.raises(UsageError):
            fit_loglog_slope(x, y)

    def test_variance_with_se(self, rng):
        samples = 2.0 * rng.standard_normal(50_000)
        variance, se = variance_with_se(samples)
        # for a Gaussian the variance has standard error sigma^2 sqrt(2/n)
        assert se == pytest.approx(4.0 * np.sqrt(2.0 / samples.size), rel=0.05)
        assert within_se(variance, 4.0, se)

    def test_standard_error_needs_two_samples(self):
        with pytest.raises(UsageError):
            standard_error(np.array([1.0]))
        with pytest.raises(UsageError):
            variance_with_se([1.0])


class TestMomentReport:

    def test_status_and_failures(self):
        report = MomentReport(name='demo')
        report.add_check('ok', True, "fine", value=1.0, expected=1.0)
        report.add_check('soft', False, "informational", warn=True)
        assert report.passed
        assert report.failures == []

        report.add_check('bad', False, "broken", value=2.0, expected=1.0)
        assert not report.passed
        assert report.failures == ['bad']

    def test_to_frame(self):
        report = MomentReport(name='demo')
        report.add_check('ok', True, "fine", value=1.0, expected=1.0)
        report.add_check('bare', True, "no values")
        frame = report.to_frame()
        assert list(frame.columns) == ['report', 'check', 'status', 'value', 'expected', 'message']
        assert list(frame['status']) == ['PASS', 'PASS']
        assert np.isnan(frame.loc[1, 'value'])


class TestChecks:

    def test_batched_noise_means_vanish_without_noise(self, sphere4):
        means = batched_noise_means(sphere4, np.ones(4), ChainParams(dim=4, noise_std=0.0), n=8, reps=10)
        assert np.all(means == 0.0)

    def test_markov_variance_scaling(self, sphere4):
        report = check_markov_variance(sphere4, reps=1000, seed=0)
        assert report.passed, report.failures
        assert set(report.slopes) == {'C1', 'n', 'tau'}

    def test_markov_variance_without_noise(self, sphere4):
        report = check_markov_variance(sphere4, reps=100, noise_std=0.0, n_grid=(4, 8), tau_grid=(1, 2))
        assert list(report.checks) == ['zero_noise']

    def test_markov_variance_needs_replications(self, sphere4):
        with pytest.raises(UsageError):
            check_markov_variance(sphere4, reps=10)

    @pytest.mark.parametrize("d,t", [(2, 0.1), (8, 1.0)])
    def test_smoothing_on_quadratics(self, d, t):
        report = check_smoothing(QuadraticMarkov(d), None, t, seed=1)
        assert report.passed, report.failures
        assert 'f_t_minus_f' in report.checks

    def test_smoothing_on_lipschitz_objective(self):
        report = check_smoothing(NonsmoothL1(4), np.full(4, 0.25), 0.1, seed=2, n_points=200)
        assert report.passed, report.failures
        assert report.checks['pointwise_band']['status'] == 'PASS'

    def test_smoothing_band_needs_lipschitz_constant(self, sphere4):
        with pytest.raises(UsageError):
            check_smoothing(sphere4, None, 0.1, mc_samples=100, n_points=5)

    def test_smoothing_radius(self, sphere4):
        with pytest.raises(UsageError):
            check_smoothing(sphere4, None, 0.0)

    def test_smoothed_gradient_is_exact_on_quadratics(self):
        problem = QuadraticMarkov(4)
        x = np.array([0.3, -1.0, 2.0, 0.0])
        np.testing.assert_array_equal(smoothed_gradient(problem, x, 0.5), problem.gradient(x))

    def test_smoothed_gradient_near_a_kink(self):
        # within t of the kink the l1 term averages sign(x0 + t v0) over the disk: 1 - 2 * 0.1955
        problem = NonsmoothL1(2, mu=1.0, l1_weight=1.0)
        x = np.array([0.005, 0.5])
        smoothed = smoothed_gradient(problem, x, 0.01, rng=np.random.default_rng(3))
        assert smoothed[0] == pytest.approx(0.005 + 0.609, abs=0.05)
        assert smoothed[1] == pytest.approx(1.5, abs=0.05)
        assert problem.gradient(x)[0] - smoothed[0] > 0.3

    def test_mixing_time_check(self):
        report = check_mixing_time(tau_values=(1, 10), trials=1000, seed=3)
        assert report.passed, report.failures
        assert [row['k_star'] for row in report.rows] == [1, 14]

    def test_mixing_time_disagreement_fails(self, monkeypatch):
        simulate = mixing_module.coupling_survival

        def biased(params, steps, trials, seed=0):
            result = simulate(params, steps, trials, seed)
            return {**result, 'empirical': min(1.0, result['empirical'] + 0.2)}

        monkeypatch.setattr(mixing_module, "coupling_survival", biased)
        report = check_mixing_time(tau_values=(10,), trials=1000, seed=3)
        assert not report.rows[0]['agrees']
        assert report.failures == ['mixing_tau10']

    def test_adversarial_estimate_bounds(self):
        report = check_adversarial_floor(QuadraticMarkov(2), delta_fractions=(0.5, 1.0), N=20, reps=2,
                                         evaluations=500, seed=4)
        for key in ('identity_zero', 'identity_constant', 'per_estimate_bound_0.5', 'per_estimate_bound_1'):
            assert report.checks[key]['status'] == 'PASS'
        assert [row['fraction'] for row in report.rows] == [0.0, 0.5, 1.0]

    def test_oracle_call_stats(self, sphere4):
        params = derive_params(mu=1.0, lipschitz=1.0, gamma=0.075, t=1e-2, B=1, dim=4, N=400)
        records = [run(sphere4, ChainParams(dim=4, tau_hold=4, noise_std=0.1), params, seed) for seed in range(3)]
        expected = expected_oracle_calls(MlmcConfig.from_momentum(params))
        report = oracle_call_stats(records, expected_per_iteration=expected)
        assert report.passed, report.failures
        assert report.replications == 3
        assert [row['alpha'] for row in report.rows] == [1.5, 2.0, 3.0]

    def test_oracle_call_stats_needs_records(self):
        with pytest.raises(UsageError):
            oracle_call_stats([])


class TestSuites:

    def test_unknown_suite(self):
        with pytest.raises(UsageError):
            run_suite('everything')

    def test_estimators_suite(self):
        reports = run_suite('estimators', seed=0)
        assert [r.name for r in reports] == ['quadratic_exactness', 'worked_example', 'oracle_calls']
        assert all(r.passed for r in reports), [r.failures for r in reports]


@pytest.mark.slow
@pytest.mark.parametrize("suite", ['chains', 'smoothing', 'mlmc', 'optimizer'])
def test_suite_passes(suite):
    reports = run_suite(suite, seed=0)
    assert all(r.passed for r in reports), {r.name: r.failures for r in reports}
