"""
Tests for the multilevel Monte-Carlo gradient estimator
"""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from src.chains import ChainParams, new_chain
from src.diagnostics.checks import (
    check_mlmc_moments,
    check_telescoping,
    check_worked_example,
    closed_form_mlmc_mean,
)
from src.errors import ConfigurationError, UsageError
from src.estimators import (
    LevelLaw,
    MlmcConfig,
    SmoothingConfig,
    batch_levels,
    expected_oracle_calls,
    level_weight,
    mlmc_estimate,
    sample_levels,
)
from src.estimators import mlmc as mlmc_module
from src.optimizer import derive_params
from src.problems import NonsmoothL1, QuadraticMarkov

SMOOTHING = SmoothingConfig(t=1e-2)


def _start_point_report(seed: int = 0):
    """MLMC mean from a fixed chain start, where every level weight shows up in the mean"""
    problem = QuadraticMarkov(4)
    return check_mlmc_moments(problem, np.zeros(4), MlmcConfig(B=1, M=8.0), SMOOTHING,
                              ChainParams(dim=4, tau_hold=32, noise_std=1.0),
                              reps=20000, seed=seed, start=np.full(4, 4.0))


class TestConfig:

    @pytest.mark.parametrize("M,expected", [(1.0, 0), (7.9, 2), (8.0, 3), (2.0 ** 60, 60), (math.inf, None)])
    def test_batch_levels(self, M, expected):
        assert batch_levels(M) == expected

    def test_level_weight(self):
        assert level_weight(0) == 1.0
        assert level_weight(3) == 8.0

    def test_default_base_batch(self):
        cfg = MlmcConfig(B=2, M=8.0)
        assert cfg.l == 8
        assert cfg.j_max == 3
        assert cfg.is_table_consistent

    @pytest.mark.parametrize("kwargs", [
        {'M': 0.5},
        {'M': math.inf},
        {'B': 0},
        {'l': 0},
        {'p': 1.5},
        {'law': 'poisson'},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            MlmcConfig(**kwargs)

    def test_unbounded_limit_with_explicit_base(self):
        cfg = MlmcConfig(B=1, M=math.inf, l=3)
        assert cfg.j_max is None
        assert expected_oracle_calls(cfg) == math.inf
        assert not cfg.is_table_consistent

    def test_from_momentum(self):
        params = derive_params(mu=1.0, lipschitz=1.0, gamma=0.075, t=1e-2, B=2, dim=4)
        cfg = MlmcConfig.from_momentum(params)
        assert cfg.M == params.M
        assert cfg.l == params.l
        assert cfg.is_table_consistent

    def test_from_momentum_rejects_inconsistent_limit(self):
        params = SimpleNamespace(p=0.5, beta=0.5, M=3.0, B=1, l=2)
        with pytest.raises(ConfigurationError):
            MlmcConfig.from_momentum(params)


class TestOracleCalls:

    def test_expected_calls_closed_form(self):
        # 2 l (1 + sum_{j<=3} 2^-j 2^j) with l = 4
        assert expected_oracle_calls(MlmcConfig(B=1, M=8.0)) == pytest.approx(32.0)

    def test_calls_per_estimate(self, sphere4):
        cfg = MlmcConfig(B=1, M=8.0)
        rng = np.random.default_rng(3)
        chain = new_chain(ChainParams(dim=4, tau_hold=2), 3)
        for _ in range(200):
            step_before = chain.step
            estimate, chain = mlmc_estimate(sphere4, chain, np.ones(4), cfg, SMOOTHING, rng)
            block = 2 ** estimate.level_j * cfg.l if cfg.uses_correction(estimate.level_j) else 0
            assert estimate.oracle_calls == 2 * (cfg.l + block)
            assert estimate.n_samples == cfg.l + block
            assert chain.step - step_before == cfg.l + block

    def test_levels_beyond_the_limit_use_the_base_only(self, sphere4):
        cfg = MlmcConfig(B=3, M=1.0)
        rng = np.random.default_rng(4)
        chain = new_chain(ChainParams(dim=4), 4)
        for _ in range(50):
            estimate, chain = mlmc_estimate(sphere4, chain, np.ones(4), cfg, SMOOTHING, rng)
            assert estimate.oracle_calls == 2 * cfg.l == 6

    def test_recorded_samples_reproduce_the_estimate(self, sphere4):
        cfg = MlmcConfig(B=1, M=8.0)
        rng = np.random.default_rng(5)
        chain = new_chain(ChainParams(dim=4, tau_hold=4), 5)
        for _ in range(100):
            estimate, chain = mlmc_estimate(sphere4, chain, np.ones(4), cfg, SMOOTHING, rng, record_samples=True)
            S = estimate.samples
            expected = S[:cfg.l].mean(axis=0)
            j = estimate.level_j
            if cfg.uses_correction(j):
                block = S[cfg.l:]
                expected = expected + 2 ** j * (block.mean(axis=0) - block[: len(block) // 2].mean(axis=0))
            np.testing.assert_allclose(estimate.vector, expected, rtol=1e-12, atol=1e-12)


class TestMoments:

    def test_noiseless_estimator_is_unbiased(self):
        report = check_mlmc_moments(QuadraticMarkov(4), None, MlmcConfig(B=1, M=8.0), SMOOTHING,
                                    ChainParams(dim=4, tau_hold=8, noise_std=0.0), reps=2000, seed=1)
        assert report.passed, report.failures
        assert set(report.checks) == {'mean_calls', 'unbiased'}

    def test_nonsmooth_mean_is_compared_to_the_smoothed_gradient(self):
        # x0 lies inside the smoothing radius of the kink, where grad f_t and grad f differ by ~0.39
        problem = NonsmoothL1(2, mu=1.0, l1_weight=1.0)
        x = np.array([0.005, 0.5])
        report = check_mlmc_moments(problem, x, MlmcConfig(B=1, M=8.0), SMOOTHING,
                                    ChainParams(dim=2, tau_hold=4, noise_std=0.0), reps=4000, seed=2)
        assert report.checks['unbiased']['status'] == 'PASS'
        assert report.passed, report.failures
        assert abs(report.mean[0] - problem.gradient(x)[0]) > 0.2

    def test_mean_from_a_fixed_start_matches_closed_form(self):
        report = _start_point_report()
        assert report.passed, report.failures
        assert report.checks['closed_form_mean']['status'] == 'PASS'

    def test_wrong_level_weight_is_detected(self, monkeypatch):
        monkeypatch.setattr(mlmc_module, "level_weight", lambda j: 1.0)
        report = _start_point_report()
        assert report.checks['closed_form_mean']['status'] == 'FAIL'

    def test_closed_form_mean_reference_values(self):
        mean = closed_form_mlmc_mean(QuadraticMarkov(4), np.zeros(4), np.full(4, 4.0), MlmcConfig(B=1, M=8.0),
                                     SMOOTHING, tau=32)
        np.testing.assert_allclose(mean, 2.7026, atol=5e-3)

    def test_closed_form_mean_reduces_to_start_when_frozen(self):
        start = np.array([1.0, -2.0, 0.5, 3.0])
        mean = closed_form_mlmc_mean(QuadraticMarkov(4), np.zeros(4), start, MlmcConfig(B=1, M=8.0),
                                     SMOOTHING, tau=2 ** 62)
        np.testing.assert_allclose(mean, start, rtol=1e-9)

    def test_needs_enough_replications(self):
        with pytest.raises(UsageError):
            check_mlmc_moments(QuadraticMarkov(2), None, MlmcConfig(), SMOOTHING, ChainParams(dim=2), reps=10)

    def test_telescoping_small(self):
        report = check_telescoping(QuadraticMarkov(4), None, MlmcConfig(B=1, M=8.0), SMOOTHING,
                                   ChainParams(dim=4, tau_hold=4, noise_std=1.0), reps=3000, seed=2)
        assert report.passed, report.failures

    def test_worked_example_frequencies(self):
        report = check_worked_example(draws=40000, seed=0)
        assert report.passed, report.failures

    def test_worked_example_band_follows_the_draws(self):
        report = check_worked_example(draws=2000, seed=1)
        bands = {row['outcome']: row['tolerance'] for row in report.rows}
        assert bands['g1'] == pytest.approx(4.0 * math.sqrt(0.25 / 2000))
        assert bands['g1_plus_g3_minus_g2'] == pytest.approx(4.0 * math.sqrt(0.1875 / 2000))
        fixed = check_worked_example(draws=2000, seed=1, tolerance=0.05)
        assert all(row['tolerance'] == 0.05 for row in fixed.rows)


@pytest.mark.slow
class TestAcceptance:

    def test_telescoping(self):
        report = check_telescoping(QuadraticMarkov(8), None, MlmcConfig(B=1, M=8.0), SMOOTHING,
                                   ChainParams(dim=8, tau_hold=8, noise_std=1.0), reps=100_000, seed=0)
        assert report.passed, report.failures

    def test_worked_example_million_draws(self):
        report = check_worked_example(draws=1_000_000, seed=0, tolerance=0.01)
        assert report.passed, report.failures

    def test_geometric_law_frequencies(self):
        J = sample_levels(np.random.default_rng(0), 1_000_000, LevelLaw.GEOMETRIC)
        for j in (1, 2, 3):
            assert abs(np.mean(J == j) - 0.5 ** j) <= 0.01
