"""
Lazy Gaussian noise chain

The chain holds its current value Z_k and, at every step, replaces it with a
fresh N(0, s^2 I) draw with probability 1/tau_hold. Resample decisions and
resampled values come from two independent PCG64 substreams spawned from the
seed, so two chains that share a seed make identical resample decisions no
matter where they start.

ChainState is a value: every transition returns a new state and leaves the
input untouched. The generator states are stored as plain dicts and a fresh
Generator is rebuilt for each transition.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Tuple

import numpy as np

from ..errors import ConfigurationError, UsageError
from ..utils.logging_utils import get_logger

logger = get_logger(__name__)


class ChainKind(str, Enum):
    LAZY_GAUSSIAN = "LazyGaussian"
    IID = "Iid"


@dataclass(frozen=True)
class ChainParams:
    """Parameters of a noise chain"""
    kind: ChainKind = ChainKind.LAZY_GAUSSIAN
    dim: int = 1                  # noise-vector dimension
    tau_hold: int = 1             # expected holding time (steps)
    noise_std: float = 1.0        # per-coordinate std s of the stationary law

    def __post_init__(self):
        try:
            kind = ChainKind(self.kind)
        except ValueError:
            raise ConfigurationError(f"Unknown chain kind: {self.kind}")
        object.__setattr__(self, 'kind', kind)

        if int(self.dim) != self.dim or self.dim < 1:
            raise ConfigurationError(f"Chain dim must be a positive integer, got {self.dim}")
        if int(self.tau_hold) != self.tau_hold or self.tau_hold < 1:
            raise ConfigurationError(f"tau_hold must be an integer >= 1, got {self.tau_hold}")
        if not np.isfinite(self.noise_std) or self.noise_std < 0:
            raise ConfigurationError(f"noise_std must be finite and >= 0, got {self.noise_std}")

        if kind is ChainKind.IID and self.tau_hold != 1:
            logger.debug(f"Iid chain: forcing tau_hold=1 (was {self.tau_hold})")
            object.__setattr__(self, 'tau_hold', 1)
        object.__setattr__(self, 'dim', int(self.dim))
        object.__setattr__(self, 'tau_hold', int(self.tau_hold))
        object.__setattr__(self, 'noise_std', float(self.noise_std))

    @property
    def resample_prob(self) -> float:
        return 1.0 / self.tau_hold


@dataclass(frozen=True, eq=False)
class ChainState:
    """
    Immutable snapshot of a noise chain

    Attributes:
        params: Chain parameters
        current: The value Z_k (read-only array)
        step: Number of transitions performed since construction
        seed: Seed the substreams were spawned from
        decision_state: PCG64 state of the resample-decision substream
        value_state: PCG64 state of the resampled-value substream
        resamples: Number of resample events so far
    """
    params: ChainParams
    current: np.ndarray
    step: int
    seed: int
    decision_state: Dict[str, Any] = field(repr=False)
    value_state: Dict[str, Any] = field(repr=False)
    resamples: int = 0

    @property
    def dim(self) -> int:
        return self.params.dim


def _generator(state: Dict[str, Any]) -> np.random.Generator:
    bit_generator = np.random.PCG64(0)
    bit_generator.state = state
    return np.random.Generator(bit_generator)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


def _substreams(seed: int | np.random.SeedSequence) -> Tuple[np.random.SeedSequence, np.random.SeedSequence, int]:
    if isinstance(seed, np.random.SeedSequence):
        sequence = seed
        seed_id = int(sequence.generate_state(1, dtype=np.uint64)[0])
    else:
        seed_id = int(seed)
        if seed_id < 0:
            raise ConfigurationError(f"Seed must be non-negative, got {seed}")
        sequence = np.random.SeedSequence(seed_id)
    decisions, values = sequence.spawn(2)
    return decisions, values, seed_id


def new_chain(params: ChainParams, seed: int | np.random.SeedSequence) -> ChainState:
    """
    Start a chain from its stationary distribution N(0, s^2 I)

    Args:
        params: Chain parameters
        seed: 64-bit seed (or a SeedSequence)

    Returns:
        ChainState at step 0
    """
    decisions, values, seed_id = _substreams(seed)
    value_rng = np.random.Generator(np.random.PCG64(values))
    current = value_rng.standard_normal(params.dim) * params.noise_std
    return ChainState(
        params=params,
        current=_frozen(current),
        step=0,
        seed=seed_id,
        decision_state=np.random.PCG64(decisions).state,
        value_state=value_rng.bit_generator.state,
    )


def new_chain_from(params: ChainParams, initial: np.ndarray, seed: int | np.random.SeedSequence) -> ChainState:
    """
    Start a chain from an arbitrary value Z_0

    Two chains built with the same seed but different `initial` make
    identical resample decisions and draw identical fresh values, so they
    coincide after the first resample.

    Raises:
        UsageError: If `initial` does not have length params.dim
    """
    initial = np.asarray(initial, dtype=float)
    if initial.shape != (params.dim,):
        raise UsageError(f"Initial value has shape {initial.shape}, expected ({params.dim},)")

    decisions, values, seed_id = _substreams(seed)
    return ChainState(
        params=params,
        current=_frozen(initial),
        step=0,
        seed=seed_id,
        decision_state=np.random.PCG64(decisions).state,
        value_state=np.random.PCG64(values).state,
    )


def trajectory(state: ChainState, n: int) -> Tuple[np.ndarray, ChainState]:
    """
    Observe the chain for n steps

    Returns:
        (Z, new_state) where Z has shape (n, dim) and holds Z_k, ..., Z_{k+n-1}
        (the value before each of the n transitions) and new_state is the
        chain at step k+n.
    """
    if n < 0:
        raise UsageError(f"Number of steps must be >= 0, got {n}")
    params = state.params
    if n == 0:
        return np.empty((0, params.dim)), state

    decision_rng = _generator(state.decision_state)
    value_rng = _generator(state.value_state)

    resample = decision_rng.random(n) < params.resample_prob
    counts = np.cumsum(resample)
    n_fresh = int(counts[-1])

    # after[i] is the value once transition i has been applied
    after = np.broadcast_to(state.current, (n, params.dim)).copy()
    if n_fresh:
        fresh = value_rng.standard_normal((n_fresh, params.dim)) * params.noise_std
        hit = counts > 0
        after[hit] = fresh[counts[hit] - 1]

    observed = np.empty((n, params.dim))
    observed[0] = state.current
    observed[1:] = after[:-1]

    new_state = replace(
        state,
        current=_frozen(after[-1]),
        step=state.step + n,
        decision_state=decision_rng.bit_generator.state,
        value_state=value_rng.bit_generator.state,
        resamples=state.resamples + n_fresh,
    )
    return observed, new_state


def advance(state: ChainState, n: int) -> ChainState:
    """Apply n transitions, discarding the observed values"""
    return trajectory(state, n)[1]


def step_chain(state: ChainState) -> ChainState:
    """Apply one transition: resample with probability 1/tau_hold, else hold"""
    return trajectory(state, 1)[1]


def stationary_variance(params: ChainParams) -> float:
    """Per-coordinate variance s^2 of the stationary law"""
    return params.noise_std ** 2
