"""
Mixing-time measurements for noise chains
"""

import math
from typing import Dict

import numpy as np

from ..errors import ConfigurationError
from ..utils.logging_utils import get_logger
from .lazy_chain import ChainParams, new_chain_from, trajectory

logger = get_logger(__name__)


def closed_form_mixing_time(params: ChainParams, tolerance: float = 0.25) -> int:
    """
    Smallest k with (1 - 1/tau)^k <= tolerance

    For tau = 1 every step resamples, so one step suffices.
    """
    if not 0.0 < tolerance < 1.0:
        raise ConfigurationError(f"tolerance must lie in (0, 1), got {tolerance}")
    tau = params.tau_hold
    if tau == 1:
        return 1
    k = math.log(1.0 / tolerance) / -math.log1p(-1.0 / tau)
    # guard against k landing a rounding error above an integer
    k_int = math.ceil(k - 1e-12)
    return max(k_int, 1)


def assumption_mixing_time(params: ChainParams) -> int:
    """Mixing time in the (1/4)^floor(k/tau) sense: ceil(tau_hold * ln 4)"""
    return max(1, math.ceil(params.tau_hold * math.log(4.0)))


def coupling_survival(params: ChainParams, steps: int, trials: int, seed: int = 0) -> Dict[str, float]:
    """
    Estimate P(two chains not coupled after `steps` transitions)

    Each trial builds two chains with the same seed but different start
    vectors (+1 and -1 in every coordinate) and checks whether their values
    differ after `steps` transitions.

    Returns:
        Dictionary with the empirical survival, its standard error and the
        closed form (1 - 1/tau)^steps
    """
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")

    ones = np.ones(params.dim)
    seeds = np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint64)
    uncoupled = 0
    for trial_seed in seeds:
        _, left = trajectory(new_chain_from(params, ones, int(trial_seed)), steps)
        _, right = trajectory(new_chain_from(params, -ones, int(trial_seed)), steps)
        uncoupled += int(not np.array_equal(left.current, right.current))

    survival = uncoupled / trials
    expected = (1.0 - params.resample_prob) ** steps
    se = math.sqrt(max(expected * (1.0 - expected), 1e-300) / trials)
    return {
        'steps': steps,
        'trials': trials,
        'empirical': survival,
        'expected': expected,
        'standard_error': se,
    }


def mixing_time_agreement(params: ChainParams, tolerance: float = 0.25, trials: int = 1000,
                          seed: int = 0) -> Dict[str, float]:
    """
    Closed-form mixing time together with the coupling simulation at that k

    The result agrees when the simulated uncoupled fraction lies within three
    standard errors (plus one trial) of (1 - 1/tau)^k.

    Returns:
        The coupling_survival dictionary plus 'k_star', 'deviation' and 'agrees'
    """
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    k_star = closed_form_mixing_time(params, tolerance)
    result = coupling_survival(params, k_star, trials, seed)
    deviation = abs(result['empirical'] - result['expected'])
    return {
        **result,
        'k_star': k_star,
        'deviation': deviation,
        'agrees': bool(deviation <= 3 * result['standard_error'] + 1.0 / trials),
    }


def empirical_mixing_time(params: ChainParams, tolerance: float = 0.25, trials: int = 1000,
                          seed: int = 0) -> int:
    """
    Mixing time of a lazy chain, cross-checked by coupling simulation

    Args:
        params: Chain parameters
        tolerance: Coupling-probability target (default 1/4)
        trials: Number of simulated chain pairs
        seed: Seed for the coupling simulation

    Returns:
        ceil(ln(1/tolerance) / -ln(1 - 1/tau)), i.e. the smallest k with
        (1 - 1/tau)^k <= tolerance. Use mixing_time_agreement to act on a
        disagreement; this function only logs it.

    Raises:
        ConfigurationError: If trials < 1 or tolerance is outside (0, 1)
    """
    check = mixing_time_agreement(params, tolerance, trials, seed)
    k_star = check['k_star']
    if not check['agrees']:
        logger.warning(
            f"Coupling simulation disagrees with closed form at k={k_star}: "
            f"empirical={check['empirical']:.4f} expected={check['expected']:.4f}"
        )
    else:
        logger.debug(f"Mixing time tau={params.tau_hold}: k*={k_star} "
                     f"(uncoupled {check['empirical']:.4f} vs {check['expected']:.4f})")
    return k_star
