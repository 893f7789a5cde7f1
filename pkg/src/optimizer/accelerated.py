"""
Randomized accelerated zero-order gradient descent

Three sequences per iteration:

    x_g     = theta x_f + (1 - theta) x
    x_f'    = x_g - p gamma g(x_g)
    x'      = eta x_f' + (p - eta) x_f + (1 - p)(1 - beta) x + (1 - p) beta x_g

with g the estimator's output at x_g. One noise chain is threaded through the
whole run, so a run is strictly sequential.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..chains.lazy_chain import ChainParams, ChainState, new_chain
from ..errors import DivergenceError, UsageError
from ..estimators.finite_difference import GradEstimate, SmoothingConfig
from ..estimators.mlmc import MlmcConfig
from ..estimators.strategies import GradientEstimator, MlmcEstimator
from ..problems.base import Problem, initial_point
from ..problems.oracle import Oracle, as_oracle
from ..utils.logging_utils import get_logger
from .params import MomentumParams

logger = get_logger(__name__)

DIVERGENCE_FACTOR = 1.0e6

RUN_COLUMNS = ['k', 'err_sq', 'lyapunov_r', 'oracle_calls_cum']


@dataclass(frozen=True, eq=False)
class IterateState:
    x: np.ndarray
    x_f: np.ndarray
    x_g: Optional[np.ndarray] = None

    @classmethod
    def initial(cls, x0: np.ndarray) -> "IterateState":
        x0 = np.array(x0, dtype=float)
        return cls(x=x0, x_f=x0.copy())


@dataclass(frozen=True, eq=False)
class RunRecord:
    """
    Trajectory of one run

    Attributes:
        x, x_f: Iterates, shape (N+1, d)
        x_g: Query points, shape (N, d)
        err_sq: ||x^k - x*||^2
        lyapunov: (1/mu)(f(x_f^k) - f*) + ||x^k - x*||^2
        lyapunov_proof: Same with coefficient 6/mu
        oracle_calls_cum: Cumulative oracle calls after k iterations
        levels: Sampled MLMC level per iteration (0 for other estimators)
        seed: Seed of the run
        config: Parameter snapshot
        complete: False when the run diverged or a budget cap stopped it
        diverged_at: Iteration index that tripped the divergence guard
        round_starts: First iteration index of each restart round
        best_index: Iteration reported as the answer; the last one unless a
            restart budget stopped the rounds before epsilon was reached
    """
    x: np.ndarray
    x_f: np.ndarray
    x_g: np.ndarray
    err_sq: np.ndarray
    lyapunov: np.ndarray
    lyapunov_proof: np.ndarray
    oracle_calls_cum: np.ndarray
    levels: np.ndarray
    seed: Any
    config: Dict[str, Any] = field(default_factory=dict)
    complete: bool = True
    diverged_at: Optional[int] = None
    round_starts: Tuple[int, ...] = (0,)
    best_index: Optional[int] = None

    @property
    def n_iterations(self) -> int:
        return len(self.err_sq) - 1

    @property
    def final_error(self) -> float:
        return float(self.err_sq[-1])

    @property
    def total_oracle_calls(self) -> int:
        return int(self.oracle_calls_cum[-1])

    @property
    def best_x(self) -> np.ndarray:
        return self.x[-1 if self.best_index is None else self.best_index]

    @property
    def best_error(self) -> float:
        return float(self.err_sq[-1 if self.best_index is None else self.best_index])

    def first_hit(self, epsilon: float) -> Optional[int]:
        """First iteration k with ||x^k - x*||^2 <= epsilon, None if never reached"""
        hits = np.flatnonzero(self.err_sq <= epsilon)
        return int(hits[0]) if hits.size else None

    def to_frame(self) -> pd.DataFrame:
        """Trajectory table with columns k, err_sq, lyapunov_r, oracle_calls_cum"""
        return pd.DataFrame({
            'k': np.arange(len(self.err_sq), dtype=np.int64),
            'err_sq': self.err_sq,
            'lyapunov_r': self.lyapunov,
            'oracle_calls_cum': self.oracle_calls_cum,
        }, columns=RUN_COLUMNS)


class _TrajectoryBuilder:
    """Accumulates per-iteration rows and freezes them into a RunRecord"""

    def __init__(self, problem: Problem, mu: float, state: IterateState, calls_offset: int = 0):
        self.problem = problem
        self.mu = mu
        self.x_star = problem.minimizer
        self.f_star = problem.optimal_value()
        self.x: List[np.ndarray] = []
        self.x_f: List[np.ndarray] = []
        self.x_g: List[np.ndarray] = []
        self.gap: List[float] = []
        self.calls: List[int] = []
        self.levels: List[int] = []
        self._append_iterate(state, calls_offset)

    def _append_iterate(self, state: IterateState, calls: int) -> None:
        self.x.append(state.x)
        self.x_f.append(state.x_f)
        self.gap.append(self.problem.value(state.x_f) - self.f_star)
        self.calls.append(calls)

    def append(self, state: IterateState, estimate: GradEstimate) -> None:
        self.x_g.append(state.x_g)
        self.levels.append(estimate.level_j)
        self._append_iterate(state, self.calls[-1] + estimate.oracle_calls)

    def freeze(self, seed: Any, config: Dict[str, Any], complete: bool = True,
               diverged_at: Optional[int] = None) -> RunRecord:
        x = np.array(self.x)
        dist_sq = np.sum((x - self.x_star) ** 2, axis=1)
        gap = np.array(self.gap)
        dim = x.shape[1]
        return RunRecord(
            x=x,
            x_f=np.array(self.x_f),
            x_g=np.array(self.x_g).reshape(-1, dim),
            err_sq=dist_sq,
            lyapunov=gap / self.mu + dist_sq,
            lyapunov_proof=6.0 * gap / self.mu + dist_sq,
            oracle_calls_cum=np.array(self.calls, dtype=np.int64),
            levels=np.array(self.levels, dtype=np.int64),
            seed=seed,
            config=config,
            complete=complete,
            diverged_at=diverged_at,
        )


def step(
    state: IterateState,
    params: MomentumParams,
    estimator: GradientEstimator,
    oracle: Oracle,
    chain: ChainState,
    rng: np.random.Generator,
    iteration: int = 0,
) -> Tuple[IterateState, ChainState, GradEstimate]:
    """
    One iteration of the accelerated method

    Raises:
        DivergenceError: If the new iterate is not finite
    """
    theta, p, gamma = params.theta, params.p, params.gamma
    eta, beta = params.eta, params.beta

    x_g = theta * state.x_f + (1.0 - theta) * state.x
    estimate, chain = estimator(oracle, chain, x_g, rng)
    x_f = x_g - p * gamma * estimate.vector
    x = eta * x_f + (p - eta) * state.x_f + (1.0 - p) * (1.0 - beta) * state.x + (1.0 - p) * beta * x_g

    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(x_f))):
        raise DivergenceError(f"Non-finite iterate at iteration {iteration}", iteration)
    return IterateState(x=x, x_f=x_f, x_g=x_g), chain, estimate


def default_estimator(params: MomentumParams) -> MlmcEstimator:
    """MLMC estimator with the batch parameters paired to `params`"""
    return MlmcEstimator(
        mlmc=MlmcConfig.from_momentum(params),
        smoothing=SmoothingConfig(t=params.t, feedback=params.feedback),
    )


def iterate(
    oracle: Oracle,
    chain: ChainState,
    params: MomentumParams,
    estimator: GradientEstimator,
    x0: np.ndarray,
    rng: np.random.Generator,
    seed: Any = None,
    config: Optional[Dict[str, Any]] = None,
    calls_offset: int = 0,
    divergence_factor: float = DIVERGENCE_FACTOR,
) -> Tuple[RunRecord, ChainState]:
    """
    Run params.N iterations from x0 on an existing chain and generator

    Returns:
        (record, chain after the last iteration)

    Raises:
        DivergenceError: With the partial record attached
    """
    problem = oracle.problem
    state = IterateState.initial(problem.check_point(x0))
    builder = _TrajectoryBuilder(problem, params.mu, state, calls_offset)
    config = config or {}
    bound = divergence_factor * (1.0 + np.linalg.norm(state.x))

    for k in range(params.N):
        try:
            state, chain, estimate = step(state, params, estimator, oracle, chain, rng, iteration=k)
        except DivergenceError as exc:
            exc.record = builder.freeze(seed, config, complete=False, diverged_at=k)
            raise
        if np.linalg.norm(state.x) > bound:
            record = builder.freeze(seed, config, complete=False, diverged_at=k)
            raise DivergenceError(
                f"||x|| = {np.linalg.norm(state.x):.3e} exceeded {bound:.3e} at iteration {k}", k, record
            )
        builder.append(state, estimate)

    return builder.freeze(seed, config), chain


def run(
    target: Problem | Oracle,
    chain_params: ChainParams,
    params: MomentumParams,
    seed: int | np.random.SeedSequence,
    x0: Optional[np.ndarray] = None,
    initial_error: float = 1e-2,
    estimator: Optional[GradientEstimator] = None,
) -> RunRecord:
    """
    N iterations of the accelerated method from x0 = x_f0

    Args:
        target: Problem or Oracle
        chain_params: Noise chain driving the oracle
        params: Momentum parameters (N is the iteration count)
        seed: Run seed; the chain, the estimator and x0 use separate substreams
        x0: Starting point; defaults to a seeded point at squared distance
            `initial_error` from x*
        initial_error: ||x0 - x*||^2 when x0 is not given
        estimator: Gradient estimator; defaults to MLMC paired with params

    Returns:
        RunRecord

    Raises:
        UsageError: If the chain or x0 do not match the problem
        DivergenceError: With the partial record attached
    """
    oracle = as_oracle(target)
    problem = oracle.problem
    if chain_params.dim != problem.noise_dim:
        raise UsageError(f"Chain dim {chain_params.dim} does not match noise dim {problem.noise_dim}")
    if params.dim != problem.dim:
        raise UsageError(f"Parameters were derived for d={params.dim}, problem has d={problem.dim}")

    sequence = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    chain_seq, estimator_seq, start_seq = sequence.spawn(3)
    chain = new_chain(chain_params, chain_seq)
    rng = np.random.default_rng(estimator_seq)
    if x0 is None:
        x0 = initial_point(problem, initial_error, np.random.default_rng(start_seq))
    estimator = estimator or default_estimator(params)

    config = {
        'problem': problem.kind.value,
        'dim': problem.dim,
        'chain': {'kind': chain_params.kind.value, 'tau_hold': chain_params.tau_hold,
                  'noise_std': chain_params.noise_std},
        'params': params.as_dict(),
        'estimator': type(estimator).__name__,
    }
    seed_id = seed if not isinstance(seed, np.random.SeedSequence) else sequence.entropy

    logger.debug(f"Run: {problem.kind.value} d={problem.dim} tau={chain_params.tau_hold} N={params.N}")
    record, _ = iterate(oracle, chain, params, estimator, x0, rng, seed=seed_id, config=config)
    return record


def run_gradient_descent(problem: Problem, x0: np.ndarray, gamma: float, N: int) -> np.ndarray:
    """
    Plain gradient descent x <- x - gamma grad f(x) on the noiseless objective

    Returns:
        Iterates, shape (N+1, d)
    """
    if gamma <= 0:
        raise UsageError(f"gamma must be positive, got {gamma}")
    x = problem.check_point(x0).copy()
    path = [x.copy()]
    for _ in range(N):
        x = x - gamma * problem.gradient(x)
        path.append(x.copy())
    return np.array(path)
