"""
Markov noise chains: the only source of Z samples
"""

from .lazy_chain import (
    ChainKind,
    ChainParams,
    ChainState,
    new_chain,
    new_chain_from,
    step_chain,
    advance,
    trajectory,
    stationary_variance,
)
from .mixing import (
    empirical_mixing_time,
    closed_form_mixing_time,
    assumption_mixing_time,
    coupling_survival,
    mixing_time_agreement,
)

__all__ = [
    # Chain types and transitions
    "ChainKind",
    "ChainParams",
    "ChainState",
    "new_chain",
    "new_chain_from",
    "step_chain",
    "advance",
    "trajectory",
    "stationary_variance",
    # Mixing
    "empirical_mixing_time",
    "closed_form_mixing_time",
    "assumption_mixing_time",
    "coupling_survival",
    "mixing_time_agreement",
]
