"""
Tests for objectives, oracles, clipping and assumption validators
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.chains import ChainParams, new_chain, new_chain_from
from src.errors import ConfigurationError, UsageError
from src.problems import (
    AdversarialSpec,
    ClipSpec,
    DiagQuadratic,
    FeedbackMode,
    HardOnePoint,
    HardTwoPoint,
    NonsmoothL1,
    Oracle,
    OracleQuery,
    ProblemKind,
    ProblemSpec,
    QuadraticMarkov,
    build_problem,
    clip_oracle,
    eval_objective,
    eval_oracle,
    hard_instance_s,
    hard_instance_s_prime,
    initial_point,
    numerical_minimizer,
    spec_from_config,
    validate_assumptions,
)


class TestObjective:

    def test_quadratic_values(self):
        problem = QuadraticMarkov(2)
        assert eval_objective(problem, np.zeros(2)) == 0.0
        assert eval_objective(problem, np.ones(2)) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(UsageError):
            eval_objective(QuadraticMarkov(2), np.zeros(3))

    def test_diag_quadratic_constants(self):
        problem = DiagQuadratic(5, mu=0.1, L=1.0)
        assert problem.strong_convexity == pytest.approx(0.1)
        assert problem.smoothness == pytest.approx(1.0)
        np.testing.assert_allclose(problem.minimizer, 0.0)

    def test_nonsmooth_lipschitz_bound(self):
        problem = NonsmoothL1(4, mu=1.0, l1_weight=0.1, radius=1.0)
        assert problem.smoothness is None
        assert problem.lipschitz == pytest.approx(1.0 + 0.1 * 2.0)

    def test_hard_two_point_minimizer(self):
        problem = HardTwoPoint(3, mu=2.0, delta=0.1, v=(1.0, -1.0, 1.0))
        np.testing.assert_allclose(problem.minimizer, [-0.05, 0.05, -0.05])
        np.testing.assert_allclose(problem.gradient(problem.minimizer), 0.0, atol=1e-15)

    def test_initial_point_distance(self, sphere4, rng):
        x0 = initial_point(sphere4, 1e-2, rng)
        assert np.sum((x0 - sphere4.minimizer) ** 2) == pytest.approx(1e-2)


class TestOracle:

    def test_single_query(self):
        problem = QuadraticMarkov(2)
        params = ChainParams(dim=2, tau_hold=4)
        chain = new_chain_from(params, np.array([0.5, -1.0]), 3)
        reply, chain = eval_oracle(problem, chain, OracleQuery(point=np.array([1.0, 0.0])))
        # f(x) = 1/2, <x, Z> = 1/2
        assert reply.values == pytest.approx((1.0,))
        assert reply.oracle_calls == 1
        assert reply.z_steps == 1
        assert chain.step == 1

    def test_zero_noise_matches_objective(self):
        problem = DiagQuadratic(3)
        chain = new_chain(ChainParams(dim=3, noise_std=0.0), 0)
        x = np.array([0.3, -0.2, 1.0])
        reply, _ = eval_oracle(problem, chain, OracleQuery(point=x))
        assert reply.values[0] == pytest.approx(eval_objective(problem, x))

    def test_pair_query_shares_the_chain_value(self):
        problem = QuadraticMarkov(2)
        Z0 = np.array([0.25, 2.0])
        chain = new_chain_from(ChainParams(dim=2, tau_hold=3), Z0, 9)
        x, e, t = np.array([1.0, 1.0]), np.array([0.0, 1.0]), 0.1
        query = OracleQuery(point=x, mode=FeedbackMode.TWO_POINT_PAIR, direction=e, t=t)
        reply, chain = eval_oracle(problem, chain, query)
        plus = eval_objective(problem, x + t * e) + (x + t * e) @ Z0
        minus = eval_objective(problem, x - t * e) + (x - t * e) @ Z0
        assert reply.values == pytest.approx((plus, minus))
        assert reply.z_steps == 1
        assert chain.step == 1

    def test_pair_query_needs_direction(self):
        problem = QuadraticMarkov(2)
        chain = new_chain(ChainParams(dim=2), 0)
        with pytest.raises(UsageError):
            eval_oracle(problem, chain, OracleQuery(point=np.zeros(2), mode=FeedbackMode.TWO_POINT_PAIR))

    def test_one_point_modes_shift_the_point(self, noiseless):
        problem = QuadraticMarkov(2)
        chain = new_chain(noiseless(2), 0)
        x, e, t = np.array([1.0, 0.0]), np.array([1.0, 0.0]), 0.5
        plus, chain = eval_oracle(problem, chain, OracleQuery(x, FeedbackMode.ONE_POINT_PLUS, e, t))
        minus, chain = eval_oracle(problem, chain, OracleQuery(x, FeedbackMode.ONE_POINT_MINUS, e, t))
        assert plus.values == pytest.approx((eval_objective(problem, x + t * e),))
        assert minus.values == pytest.approx((eval_objective(problem, x - t * e),))
        # f quadratic: F(x + te) - F(x - te) = 2t <grad f(x), e> exactly
        assert plus.values[0] - minus.values[0] == pytest.approx(2 * t * problem.gradient(x) @ e)
        assert chain.step == 2

    def test_one_point_pair_sees_two_chain_values(self):
        problem = QuadraticMarkov(2)
        Z0 = np.array([0.25, 2.0])
        chain = new_chain_from(ChainParams(dim=2, tau_hold=1), Z0, 4)
        x, e, t = np.array([1.0, 1.0]), np.array([0.0, 1.0]), 0.1
        plus, chain = eval_oracle(problem, chain, OracleQuery(x, FeedbackMode.ONE_POINT_PLUS, e, t))
        assert plus.values[0] == pytest.approx(eval_objective(problem, x + t * e) + (x + t * e) @ Z0)
        # tau_hold = 1 resamples every step
        Z1 = chain.current
        minus, _ = eval_oracle(problem, chain, OracleQuery(x, FeedbackMode.ONE_POINT_MINUS, e, t))
        assert minus.values[0] == pytest.approx(eval_objective(problem, x - t * e) + (x - t * e) @ Z1)

    def test_one_point_needs_both_direction_and_shift(self):
        chain = new_chain(ChainParams(dim=2), 0)
        with pytest.raises(UsageError):
            eval_oracle(QuadraticMarkov(2), chain,
                        OracleQuery(np.zeros(2), FeedbackMode.ONE_POINT_MINUS, direction=np.array([1.0, 0.0])))

    def test_chain_dimension_mismatch(self):
        with pytest.raises(UsageError):
            eval_oracle(QuadraticMarkov(2), new_chain(ChainParams(dim=3), 0), OracleQuery(point=np.zeros(2)))

    def test_closed_form_differences(self, rng):
        problem = QuadraticMarkov(4)
        x = rng.standard_normal(4)
        E = rng.standard_normal((50, 4))
        E /= np.linalg.norm(E, axis=1, keepdims=True)
        Zp, Zm = rng.standard_normal((50, 4)), rng.standard_normal((50, 4))
        t = 0.3
        naive = problem.noisy_values(x + t * E, Zp) - problem.noisy_values(x - t * E, Zm)
        np.testing.assert_allclose(problem.differences(x, E, t, Zp, Zm), naive, rtol=1e-10, atol=1e-12)

    def test_constant_perturbation_cancels(self, rng):
        problem = QuadraticMarkov(3)
        x = rng.standard_normal(3)
        E = rng.standard_normal((20, 3))
        Z = rng.standard_normal((20, 3))
        clean = Oracle(problem)
        shifted = clean.with_adversary(AdversarialSpec(0.3, 'constant'))
        np.testing.assert_array_equal(shifted.differences(x, E, 0.1, Z, Z), clean.differences(x, E, 0.1, Z, Z))
        np.testing.assert_allclose(shifted.values(x + E, Z) - clean.values(x + E, Z), 0.3)

    def test_sign_flip_is_bounded_and_deterministic(self, rng):
        spec = AdversarialSpec(0.05, 'sign_flip')
        X = rng.standard_normal((1000, 5))
        values = spec(X)
        assert np.all(np.abs(values) <= 0.05)
        np.testing.assert_array_equal(values, spec(X))

    def test_unknown_perturbation(self):
        with pytest.raises(ConfigurationError):
            AdversarialSpec(0.1, 'random_walk')


class TestClipping:

    def test_inside_band_unchanged(self):
        assert clip_oracle(1.0, 0.5, 1.5, t_clip=2.0, sigma1=0.1) == 1.0

    def test_clamped_to_band(self):
        values = clip_oracle(np.array([-10.0, 10.0]), 0.0, 1.0, t_clip=3.0, sigma1=0.5)
        np.testing.assert_allclose(values, [-1.5, 2.5])

    @pytest.mark.parametrize("f_min,f_max,t_clip,sigma1", [
        (2.0, 1.0, 2.0, 0.1),
        (0.0, 1.0, 1.0, 0.1),
        (0.0, 1.0, 2.0, -0.1),
    ])
    def test_contract(self, f_min, f_max, t_clip, sigma1):
        with pytest.raises(UsageError):
            clip_oracle(0.0, f_min, f_max, t_clip, sigma1)

    def test_clipping_bias(self, rng):
        sigma1, f = 0.2, 1.0
        t_clip = np.log(10.0)
        F = f + sigma1 * rng.standard_normal(1_000_000)
        clipped = clip_oracle(F, f, f, t_clip, sigma1)
        bias = abs(clipped.mean() - F.mean())
        se = np.std(clipped - F, ddof=1) / np.sqrt(F.size)
        assert bias <= sigma1 * np.exp(-t_clip ** 2 / 2.0) + 3 * se

    def test_clipped_oracle_stays_in_band(self, rng):
        problem = HardTwoPoint(2, delta=0.1)
        oracle = Oracle(problem, clip=ClipSpec(t_clip=2.0, sigma1=0.01))
        X = rng.standard_normal((200, 2))
        Z = 100.0 * rng.standard_normal((200, 2))
        low, high = problem.value_band(X)
        F = oracle.values(X, Z)
        assert np.all(F >= low - 0.02 - 1e-12)
        assert np.all(F <= high + 0.02 + 1e-12)


class TestHardInstances:

    def test_profile_values(self):
        delta = 1.0
        assert hard_instance_s(delta, 0.5) == pytest.approx(1.0)
        assert hard_instance_s(delta, 3.0) == pytest.approx(3.0)
        assert hard_instance_s(delta, 1.5) == pytest.approx(2.75)
        assert hard_instance_s(delta, -1.5) == pytest.approx(-2.75)

    def test_profile_needs_positive_delta(self):
        with pytest.raises(UsageError):
            hard_instance_s(0.0, 1.0)

    @pytest.mark.parametrize("knot", [1.0, 2.0])
    def test_derivative_continuous_at_knots(self, knot):
        delta = 0.7
        xi = knot * delta
        left = hard_instance_s_prime(delta, xi - 1e-12)
        right = hard_instance_s_prime(delta, xi + 1e-12)
        assert abs(left - right) <= 1e-10

    def test_minimizer_and_curvature(self):
        problem = HardOnePoint(3, mu=1.0, delta=0.3, omega=(1.0, -1.0, 1.0))
        np.testing.assert_allclose(problem.minimizer, [-0.15, 0.15, -0.15])
        np.testing.assert_allclose(numerical_minimizer(problem), problem.minimizer, atol=1e-6)
        assert problem.strong_convexity == pytest.approx(0.5)
        assert problem.smoothness == pytest.approx(1.5)

    def test_from_budget(self):
        problem = HardOnePoint.from_budget(dim=4, mu=1.0, sigma1_sq=1.0, tau=8, n_iterations=1000)
        assert problem.delta == pytest.approx((8 / (4 * 1000)) ** 0.25)
        assert problem.s2 == pytest.approx(8 * 1000 / 8)


class TestRegistry:

    def test_build_each_kind(self):
        for kind in ProblemKind:
            problem = build_problem(ProblemSpec(kind=kind, dim=3, mu=0.5, lips_grad=None))
            assert problem.dim == 3
            assert problem.kind is kind

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            build_problem(ProblemSpec(kind='Rosenbrock', dim=2))

    def test_mu_above_smoothness(self):
        with pytest.raises(ConfigurationError):
            build_problem(ProblemSpec(kind=ProblemKind.DIAG_QUADRATIC, dim=2, mu=2.0, lips_grad=1.0))

    def test_spec_from_config_keeps_extra_fields(self):
        spec = spec_from_config({'kind': 'NonsmoothL1', 'mu': 2.0, 'l1_weight': 0.2}, dim=5)
        assert spec.params == {'l1_weight': 0.2}
        problem = build_problem(spec)
        assert problem.l1_weight == pytest.approx(0.2)
        assert problem.strong_convexity == pytest.approx(2.0)


class TestValidators:

    def test_diag_quadratic_constants(self, diag2):
        results = validate_assumptions(diag2, samples=200, seed=1)
        assert all(r['status'] == 'PASS' for r in results.values())
        assert results['strong_convexity']['details']['observed_mu'] >= 0.1 * (1 - 1e-9)
        assert results['smoothness']['details']['observed_L'] <= 1.0 * (1 + 1e-9)

    def test_hard_one_point(self):
        results = validate_assumptions(HardOnePoint(4, delta=0.3), samples=300, seed=2)
        assert results['hessian_range']['status'] == 'PASS'
        assert results['numerical_minimizer']['status'] == 'PASS'
        assert results['strong_convexity']['status'] == 'PASS'

    def test_gaussian_noise_is_a_warning(self, sphere4):
        results = validate_assumptions(sphere4, samples=50, seed=3, noise_std=0.5)
        noise = results['noise']
        assert noise['status'] == 'WARNING'
        # points lie in the unit ball, so E<x, Z>^2 = s^2 ||x||^2 <= s^2
        assert noise['details']['sigma1_sq_worst'] <= 1.2 * 0.25

    def test_needs_two_samples(self, sphere4):
        with pytest.raises(UsageError):
            validate_assumptions(sphere4, samples=1)


class TestProperties:

    @given(delta=st.floats(min_value=0.01, max_value=2.0), xi=st.floats(min_value=-5.0, max_value=5.0))
    @settings(max_examples=300, deadline=None)
    def test_profile_is_continuously_differentiable(self, delta, xi):
        h = 1e-6
        slope = (hard_instance_s(delta, xi + h) - hard_instance_s(delta, xi - h)) / (2 * h)
        # |s''| <= 2, so the central difference is within 2h of s'
        assert abs(slope - float(hard_instance_s_prime(delta, xi))) <= 2 * h + 1e-8

    @given(delta=st.floats(min_value=0.01, max_value=2.0), xi=st.floats(min_value=-5.0, max_value=5.0))
    @settings(max_examples=200, deadline=None)
    def test_profile_is_odd_and_bounded(self, delta, xi):
        assert hard_instance_s(delta, -xi) == -hard_instance_s(delta, xi)
        assert abs(hard_instance_s(delta, xi)) <= 3 * delta ** 2 * (1 + 1e-12)
        assert 0.0 <= float(hard_instance_s_prime(delta, xi)) <= 2 * delta

    @given(
        value=st.floats(min_value=-1e6, max_value=1e6),
        f_min=st.floats(min_value=-10.0, max_value=10.0),
        width=st.floats(min_value=0.0, max_value=5.0),
        t_clip=st.floats(min_value=1.01, max_value=10.0),
        sigma1=st.floats(min_value=0.0, max_value=2.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_clipping_band(self, value, f_min, width, t_clip, sigma1):
        f_max = f_min + width
        low, high = f_min - t_clip * sigma1, f_max + t_clip * sigma1
        clipped = clip_oracle(value, f_min, f_max, t_clip, sigma1)
        assert low <= clipped <= high
        if low <= value <= high:
            assert clipped == value
