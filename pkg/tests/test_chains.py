"""
Tests for the lazy Gaussian noise chain and its mixing time
"""

import math

import numpy as np
import pytest

from src.chains import (
    ChainKind,
    ChainParams,
    advance,
    assumption_mixing_time,
    closed_form_mixing_time,
    coupling_survival,
    empirical_mixing_time,
    mixing_time_agreement,
    new_chain,
    new_chain_from,
    stationary_variance,
    step_chain,
    trajectory,
)
from src.diagnostics.moments import standard_error, variance_with_se, within_se
from src.errors import ConfigurationError, UsageError


class TestChainParams:

    def test_iid_forces_unit_holding_time(self):
        params = ChainParams(kind=ChainKind.IID, dim=3, tau_hold=50)
        assert params.tau_hold == 1
        assert params.resample_prob == 1.0

    @pytest.mark.parametrize("kwargs", [
        {'dim': 0},
        {'tau_hold': 0},
        {'tau_hold': 2.5},
        {'noise_std': -1.0},
        {'noise_std': float('nan')},
        {'kind': 'Telegraph'},
    ])
    def test_invalid_fields(self, kwargs):
        with pytest.raises(ConfigurationError):
            ChainParams(**kwargs)

    def test_stationary_variance(self):
        assert stationary_variance(ChainParams(noise_std=1.5)) == pytest.approx(2.25)


class TestTransitions:

    def test_same_seed_same_trajectory(self):
        params = ChainParams(dim=3, tau_hold=5, noise_std=2.0)
        Z1, s1 = trajectory(new_chain(params, 42), 200)
        Z2, s2 = trajectory(new_chain(params, 42), 200)
        np.testing.assert_array_equal(Z1, Z2)
        np.testing.assert_array_equal(s1.current, s2.current)
        assert s1.resamples == s2.resamples

    def test_different_seeds_differ(self):
        params = ChainParams(dim=3, tau_hold=1)
        Z1, _ = trajectory(new_chain(params, 1), 10)
        Z2, _ = trajectory(new_chain(params, 2), 10)
        assert not np.array_equal(Z1, Z2)

    def test_zero_noise_is_zero(self):
        params = ChainParams(dim=4, tau_hold=3, noise_std=0.0)
        Z, state = trajectory(new_chain(params, 7), 100)
        assert np.all(Z == 0.0)
        assert np.all(state.current == 0.0)

    def test_state_is_not_mutated(self):
        params = ChainParams(dim=2, tau_hold=2)
        state = new_chain(params, 5)
        before = state.current.copy()
        _, after = trajectory(state, 50)
        np.testing.assert_array_equal(state.current, before)
        assert state.step == 0
        assert after.step == 50
        with pytest.raises(ValueError):
            state.current[0] = 1.0

    def test_trajectory_matches_single_steps(self):
        params = ChainParams(dim=2, tau_hold=3, noise_std=1.0)
        Z, batched = trajectory(new_chain(params, 99), 20)

        state = new_chain(params, 99)
        for k in range(20):
            np.testing.assert_array_equal(Z[k], state.current)
            state = step_chain(state)
        np.testing.assert_array_equal(state.current, batched.current)
        assert state.resamples == batched.resamples

    def test_advance_equals_trajectory_endpoint(self):
        params = ChainParams(dim=2, tau_hold=6)
        _, end = trajectory(new_chain(params, 3), 37)
        np.testing.assert_array_equal(advance(new_chain(params, 3), 37).current, end.current)

    def test_zero_steps(self):
        state = new_chain(ChainParams(dim=2), 0)
        Z, same = trajectory(state, 0)
        assert Z.shape == (0, 2)
        assert same is state
        with pytest.raises(UsageError):
            trajectory(state, -1)

    def test_new_chain_from_checks_shape(self):
        with pytest.raises(UsageError):
            new_chain_from(ChainParams(dim=3), np.zeros(2), 0)

    def test_unit_holding_time_resamples_every_step(self):
        params = ChainParams(dim=2, tau_hold=1)
        Z, state = trajectory(new_chain(params, 8), 50)
        assert state.resamples == 50
        assert np.all(np.any(np.diff(Z, axis=0) != 0.0, axis=1))

    def test_huge_holding_time_freezes_the_chain(self):
        params = ChainParams(dim=3, tau_hold=2 ** 62)
        start = new_chain(params, 21)
        Z, state = trajectory(start, 100)
        assert state.resamples == 0
        np.testing.assert_array_equal(Z, np.broadcast_to(start.current, Z.shape))

    def test_resample_frequency(self):
        n = 100_000
        _, state = trajectory(new_chain(ChainParams(dim=1, tau_hold=4), 2024), n)
        frequency = state.resamples / n
        se = math.sqrt(0.25 * 0.75 / n)
        assert within_se(frequency, 0.25, se)


class TestStationarity:

    def test_iid_variance(self):
        params = ChainParams(kind=ChainKind.IID, dim=2, noise_std=2.0)
        Z, _ = trajectory(new_chain(params, 17), 100_000)
        variance, se = variance_with_se(Z)
        assert within_se(variance, 4.0, se)
        assert within_se(Z.mean(), 0.0, standard_error(Z.ravel()))

    def test_marginals_stay_stationary(self):
        params = ChainParams(dim=1, tau_hold=5, noise_std=1.5)
        chains = 2000
        observed = np.empty((chains, 3))
        for i, seed in enumerate(np.random.SeedSequence(31).generate_state(chains)):
            Z, _ = trajectory(new_chain(params, int(seed)), 101)
            observed[i] = Z[[0, 10, 100], 0]

        for column in observed.T:
            # six comparisons in total, hence 4 standard errors
            assert within_se(column.mean(), 0.0, standard_error(column), k=4.0)
            variance, se = variance_with_se(column)
            assert within_se(variance, 2.25, se, k=4.0)


class TestMixing:

    @pytest.mark.parametrize("tau,expected", [(1, 1), (10, 14), (100, 138)])
    def test_closed_form(self, tau, expected):
        assert closed_form_mixing_time(ChainParams(tau_hold=tau)) == expected

    def test_empirical_agrees_with_closed_form(self):
        params = ChainParams(dim=2, tau_hold=10)
        assert empirical_mixing_time(params, trials=500, seed=4) == 14

    def test_agreement_report(self):
        check = mixing_time_agreement(ChainParams(dim=2, tau_hold=10), trials=500, seed=4)
        assert check['k_star'] == 14
        assert check['agrees']
        assert check['deviation'] == pytest.approx(abs(check['empirical'] - check['expected']))

    def test_assumption_mixing_time(self):
        assert assumption_mixing_time(ChainParams(tau_hold=10)) == 14
        assert assumption_mixing_time(ChainParams(tau_hold=1)) == 2

    def test_coupling_survival(self):
        check = coupling_survival(ChainParams(dim=2, tau_hold=5), steps=3, trials=4000, seed=1)
        assert check['expected'] == pytest.approx(0.8 ** 3)
        assert abs(check['empirical'] - check['expected']) <= 3 * check['standard_error'] + 1.0 / 4000

    def test_invalid_arguments(self):
        params = ChainParams(tau_hold=10)
        with pytest.raises(ConfigurationError):
            empirical_mixing_time(params, trials=0)
        with pytest.raises(ConfigurationError):
            closed_form_mixing_time(params, tolerance=1.5)
