"""
Theorem-driven tuning and the restart procedure

All universal constants hidden in the convergence theorems default to 1 and
are exposed through TuningConstants.

Restarts run the method for N = 1, 2, 4, ... iterations with stepsize
gamma = Gamma(N)^2,

    Gamma(N) = min( ln(max(2, a r0 N / b)) / (a N), 1/u ),

warm-starting every round from the previous round's last iterate.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..chains.lazy_chain import ChainParams, new_chain
from ..errors import ConfigurationError, DivergenceError, InfeasibleTargetError, UsageError
from ..estimators.finite_difference import Feedback
from ..estimators.mlmc import MlmcConfig, expected_oracle_calls
from ..estimators.strategies import GradientEstimator
from ..problems.base import Problem, ProblemSpec, initial_point
from ..problems.oracle import Oracle, as_oracle
from ..utils.logging_utils import get_logger
from .accelerated import RunRecord, default_estimator, iterate
from .params import MomentumParams, default_p, derive_params, with_stepsize

logger = get_logger(__name__)


@dataclass(frozen=True)
class TuningConstants:
    """Multipliers for the theorems' order-of-magnitude rules"""
    t: float = 1.0
    delta: float = 1.0
    iterations: float = 1.0


@dataclass(frozen=True)
class TuningResult:
    gamma: float
    t: float
    p: float
    delta_max: float
    L: float                          # smoothness used for gamma (sqrt(d) G / t when non-smooth)
    mu: float
    dim: int
    B: int
    epsilon: float
    feedback: Feedback
    smooth: bool
    predicted_iterations: float
    predicted_oracle_calls: float

    def as_dict(self) -> Dict[str, Any]:
        result = asdict(self)
        result['feedback'] = self.feedback.value
        return result

    def to_params(self, N: int) -> MomentumParams:
        """MomentumParams at the tuned point"""
        lipschitz = self.L if self.smooth else self.L * self.t / math.sqrt(self.dim)
        return derive_params(self.mu, lipschitz, self.gamma, self.t, B=self.B, p=self.p,
                             feedback=self.feedback, smooth=self.smooth, dim=self.dim, N=N)


def _as_spec(problem: Problem | ProblemSpec) -> ProblemSpec:
    return problem.spec if isinstance(problem, Problem) else problem


def predicted_iterations(
    mu: float,
    lipschitz: float,
    dim: int,
    B: int,
    epsilon: float,
    tau: int = 1,
    sigma_sq: float = 0.0,
    feedback: Feedback = Feedback.TWO_POINT,
    smooth: bool = True,
    constant: float = 1.0,
) -> float:
    """
    Iteration count of the convergence theorems with constants set to 1

    Smooth (lipschitz = L):
        max(1, d/B) sqrt(L/mu) ln(1/eps) + noise
        two-point noise: (d + tau) s2 / (B mu^2 eps)
        one-point noise: L d (d + tau) s1 / (B mu^3 eps^2)
    Non-smooth (lipschitz = G):
        sqrt(sqrt(d) G^2 / (mu^2 eps)) ln(1/eps) + d G^2 / (B mu^2 eps) + noise
        two-point noise: (d + tau) s2 / (B mu^2 eps)
        one-point noise: d (d + tau) s1 G^2 / (B mu^4 eps^3)
    """
    if epsilon <= 0:
        raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
    log_term = max(1.0, math.log(1.0 / epsilon))
    two_point = Feedback(feedback) is Feedback.TWO_POINT

    if smooth:
        L = lipschitz
        deterministic = max(1.0, dim / B) * math.sqrt(L / mu) * log_term
        if two_point:
            noise = (dim + tau) * sigma_sq / (B * mu ** 2 * epsilon)
        else:
            noise = L * dim * (dim + tau) * sigma_sq / (B * mu ** 3 * epsilon ** 2)
    else:
        G = lipschitz
        deterministic = math.sqrt(math.sqrt(dim) * G ** 2 / (mu ** 2 * epsilon)) * log_term
        deterministic += dim * G ** 2 / (B * mu ** 2 * epsilon)
        if two_point:
            noise = (dim + tau) * sigma_sq / (B * mu ** 2 * epsilon)
        else:
            noise = dim * (dim + tau) * sigma_sq * G ** 2 / (B * mu ** 4 * epsilon ** 3)

    return constant * (deterministic + noise)


def predicted_oracle_calls(iterations: float, params: MomentumParams) -> float:
    """Iterations times the expected MLMC cost per iteration"""
    cfg = MlmcConfig(B=params.B, M=params.M, p=params.p, l=params.l)
    return iterations * expected_oracle_calls(cfg)


def tune_theorem(
    problem: Problem | ProblemSpec,
    epsilon: float,
    B: int = 1,
    feedback: Feedback = Feedback.TWO_POINT,
    smooth: Optional[bool] = None,
    delta: float = 0.0,
    tau: int = 1,
    sigma_sq: float = 0.0,
    constants: TuningConstants = TuningConstants(),
) -> TuningResult:
    """
    Parameters at the theorems' tuning point for target accuracy epsilon

    Smooth: t = c sqrt(mu eps / L), gamma = 3/(4L), p = B/(B+d),
        delta_max = eps mu^(3/2) / (d sqrt(L)).
    Non-smooth: t = c mu eps / G, L = sqrt(d) G / t, gamma = 3/(4L), p = 1,
        delta_max = eps^(3/2) mu^2 / (d G).

    Args:
        problem: Problem or ProblemSpec providing mu, L or G and d
        epsilon: Target E||x^N - x*||^2
        B: Batch-size multiplier
        feedback: One- or two-point feedback
        smooth: Force the smooth or non-smooth rules; defaults to whether L is known
        delta: Declared adversarial bound
        tau: Mixing time used for the predicted cost
        sigma_sq: Noise level used for the predicted cost
        constants: Universal constants

    Returns:
        TuningResult

    Raises:
        ConfigurationError: If epsilon <= 0 or a needed constant is missing
        InfeasibleTargetError: If delta exceeds delta_max
    """
    spec = _as_spec(problem)
    if not epsilon > 0:
        raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
    if delta < 0:
        raise ConfigurationError(f"delta must be >= 0, got {delta}")
    if smooth is None:
        smooth = spec.lips_grad is not None
    mu, d = spec.mu, spec.dim

    if smooth:
        if spec.lips_grad is None:
            raise ConfigurationError(f"{spec.kind.value} has no gradient Lipschitz constant")
        lipschitz = L = spec.lips_grad
        t = constants.t * math.sqrt(mu * epsilon / L)
        delta_max = constants.delta * epsilon * mu ** 1.5 / (d * math.sqrt(L))
        floor = d * delta * math.sqrt(L) / mu ** 1.5
    else:
        if spec.lips_f is None:
            raise ConfigurationError(f"{spec.kind.value} has no function Lipschitz constant")
        lipschitz = G = spec.lips_f
        t = constants.t * mu * epsilon / G
        L = math.sqrt(d) * G / t
        delta_max = constants.delta * epsilon ** 1.5 * mu ** 2 / (d * G)
        floor = (d * G * delta / mu ** 2) ** (2.0 / 3.0)

    if delta > delta_max:
        raise InfeasibleTargetError(
            f"epsilon={epsilon:g} is below the adversarial floor {floor:.3g} for delta={delta:g} "
            f"(largest tolerable delta is {delta_max:.3g})"
        )

    p = default_p(B, d, smooth)
    gamma = 3.0 / (4.0 * L)
    iterations = predicted_iterations(mu, lipschitz, d, B, epsilon, tau=tau, sigma_sq=sigma_sq,
                                      feedback=feedback, smooth=smooth, constant=constants.iterations)
    params = derive_params(mu, lipschitz, gamma, t, B=B, p=p, feedback=feedback, smooth=smooth, dim=d, N=1)

    return TuningResult(
        gamma=gamma, t=t, p=p, delta_max=delta_max, L=L, mu=mu, dim=d, B=B, epsilon=epsilon,
        feedback=Feedback(feedback), smooth=smooth,
        predicted_iterations=iterations,
        predicted_oracle_calls=predicted_oracle_calls(iterations, params),
    )


# ============================================================================
# Restarts
# ============================================================================

@dataclass(frozen=True)
class RestartRates:
    """Rates (a, b, u) of the stepsize-tuning recursion r^N <= (1/(a gamma') ... )"""
    a: float
    b: float
    u: float


def restart_rates(params: MomentumParams, tau: int, sigma_sq: float) -> RestartRates:
    """
    (a, b, u) for the restart recursion

        a = p sqrt(mu),  u = sqrt(4L/3)
        b = (p / mu^(3/2)) (noise + bias)

    with noise = s2 (d + tau) / B (two-point) or s1 d (d + tau) / (t^2 B)
    (one-point), and bias = t^2 L^2 d^2 / B (smooth) or d G^2 / B
    (non-smooth, G = L t / sqrt(d)).
    """
    if sigma_sq < 0 or tau < 1:
        raise ConfigurationError(f"Need sigma_sq >= 0 and tau >= 1, got {sigma_sq}, {tau}")
    p, mu, t, L, d, B = params.p, params.mu, params.t, params.L, params.dim, params.B

    if params.feedback is Feedback.TWO_POINT:
        noise = sigma_sq * (d + tau) / B
    else:
        noise = sigma_sq * d * (d + tau) / (t ** 2 * B)
    if params.smooth:
        bias = t ** 2 * L ** 2 * d ** 2 / B
    else:
        G = L * t / math.sqrt(d)
        bias = d * G ** 2 / B

    return RestartRates(a=p * math.sqrt(mu), b=p / mu ** 1.5 * (noise + bias), u=math.sqrt(4.0 * L / 3.0))


def stepsize_for_horizon(N: int, r0: float, rates: RestartRates) -> float:
    """gamma = Gamma(N)^2; Gamma = 1/u when b = 0"""
    if N < 1:
        raise UsageError(f"Horizon must be >= 1, got {N}")
    cap = 1.0 / rates.u
    if rates.b == 0:
        return cap ** 2
    gamma_root = math.log(max(2.0, rates.a * r0 * N / rates.b)) / (rates.a * N)
    return min(gamma_root, cap) ** 2


def error_proxy(record: RunRecord, use_minimizer: bool = True) -> float:
    """
    Error estimate used to stop restarts

    With a known minimizer this is ||x^N - x*||^2; otherwise the squared
    distance between x^N and the average of the first half of the iterates.
    """
    if use_minimizer:
        return record.final_error
    head = record.x[: max(1, len(record.x) // 2)]
    return float(np.sum((record.x[-1] - head.mean(axis=0)) ** 2))


def concat_records(records: List[RunRecord], complete: bool = True,
                   config: Optional[Dict[str, Any]] = None, best_index: Optional[int] = None) -> RunRecord:
    """Join consecutive warm-started rounds into one trajectory"""
    if not records:
        raise UsageError("No records to concatenate")
    first = records[0]
    starts, offset = [], 0
    for record in records:
        starts.append(offset)
        offset += record.n_iterations

    def join(name: str) -> np.ndarray:
        parts = [getattr(first, name)] + [getattr(r, name)[1:] for r in records[1:]]
        return np.concatenate(parts)

    last = records[-1]
    diverged_at = None if last.diverged_at is None else starts[-1] + last.diverged_at
    return RunRecord(
        x=join('x'),
        x_f=join('x_f'),
        x_g=np.concatenate([r.x_g for r in records]),
        err_sq=join('err_sq'),
        lyapunov=join('lyapunov'),
        lyapunov_proof=join('lyapunov_proof'),
        oracle_calls_cum=join('oracle_calls_cum'),
        levels=np.concatenate([r.levels for r in records]),
        seed=first.seed,
        config=config if config is not None else first.config,
        complete=complete,
        diverged_at=diverged_at,
        round_starts=tuple(starts),
        best_index=best_index,
    )


def run_with_restarts(
    target: Problem | Oracle,
    chain_params: ChainParams,
    base_params: MomentumParams,
    epsilon: float,
    seed: int | np.random.SeedSequence,
    tau: Optional[int] = None,
    sigma_sq: Optional[float] = None,
    max_rounds: int = 24,
    max_oracle_calls: Optional[int] = None,
    x0: Optional[np.ndarray] = None,
    initial_error: float = 1e-2,
    use_minimizer: bool = True,
    estimator_factory: Callable[[MomentumParams], GradientEstimator] = default_estimator,
) -> RunRecord:
    """
    Restarted runs with N = 1, 2, 4, ... until the error estimate reaches epsilon

    Args:
        target: Problem or Oracle
        chain_params: Noise chain, threaded through all rounds
        base_params: Parameters whose (t, B, p, feedback, smoothness) are kept
        epsilon: Target error
        seed: Run seed
        tau: Mixing time for the rates; defaults to the chain's holding time
        sigma_sq: Noise level for the rates; defaults to d s^2 of the chain
        max_rounds: Cap on the number of rounds
        max_oracle_calls: Cap on the cumulative oracle calls
        x0: Starting point (seeded point at `initial_error` when omitted)
        initial_error: ||x0 - x*||^2 when x0 is not given
        use_minimizer: Measure the error against the known minimizer
        estimator_factory: Builds the estimator for each round's parameters

    Returns:
        Concatenated RunRecord; when a cap stops the rounds it is flagged
        `complete=False` and `best_index` points at the round end with the
        smallest error estimate

    Raises:
        ConfigurationError: If epsilon <= 0
        DivergenceError: With the concatenated partial record attached
    """
    if not epsilon > 0:
        raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
    if max_rounds < 1:
        raise ConfigurationError(f"max_rounds must be >= 1, got {max_rounds}")
    oracle = as_oracle(target)
    problem = oracle.problem
    tau = chain_params.tau_hold if tau is None else tau
    sigma_sq = chain_params.dim * chain_params.noise_std ** 2 if sigma_sq is None else sigma_sq
    rates = restart_rates(base_params, tau, sigma_sq)

    sequence = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    chain_seq, estimator_seq, start_seq = sequence.spawn(3)
    chain = new_chain(chain_params, chain_seq)
    rng = np.random.default_rng(estimator_seq)
    x = initial_point(problem, initial_error, np.random.default_rng(start_seq)) if x0 is None else x0
    seed_id = seed if not isinstance(seed, np.random.SeedSequence) else sequence.entropy

    f_star = problem.optimal_value()
    records: List[RunRecord] = []
    rounds: List[Dict[str, float]] = []
    complete = False
    calls = 0
    best_index, best_error = None, np.inf

    for round_index in range(max_rounds):
        N = 2 ** round_index
        x = problem.check_point(x)
        r0 = (problem.value(x) - f_star) / base_params.mu + float(np.sum((x - problem.minimizer) ** 2))
        gamma = stepsize_for_horizon(N, r0, rates)
        params = with_stepsize(base_params, gamma, N)
        rounds.append({'N': N, 'gamma': gamma, 'r0': r0})

        try:
            record, chain = iterate(oracle, chain, params, estimator_factory(params), x, rng,
                                    seed=seed_id, config={'N': N, 'gamma': gamma}, calls_offset=calls)
        except DivergenceError as exc:
            exc.record = concat_records(records + [exc.record], complete=False,
                                        config={'rounds': rounds, 'base': base_params.as_dict()})
            raise

        records.append(record)
        calls = record.total_oracle_calls
        x = record.x[-1]
        error = error_proxy(record, use_minimizer)
        end_index = sum(r.n_iterations for r in records)
        if error < best_error:
            best_index, best_error = end_index, error
        logger.debug(f"Restart round {round_index}: N={N}, gamma={gamma:.3e}, error={error:.3e}, calls={calls}")

        if error <= epsilon:
            complete = True
            break
        if max_oracle_calls is not None and calls >= max_oracle_calls:
            logger.warning(f"Oracle-call budget {max_oracle_calls} exhausted after {round_index + 1} rounds")
            break
    else:
        logger.warning(f"Restarts stopped after {max_rounds} rounds without reaching epsilon={epsilon:g}")

    return concat_records(records, complete=complete,
                          config={'rounds': rounds, 'base': base_params.as_dict(), 'epsilon': epsilon},
                          best_index=None if complete else best_index)
