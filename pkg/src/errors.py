"""
Exception hierarchy for the markov-zo toolkit
"""

from typing import Any, Optional


class MarkovZOError(Exception):
    """Base class for all toolkit errors"""


class ConfigurationError(MarkovZOError, ValueError):
    """Invalid parameters or configuration values"""


class DegenerateParametersError(ConfigurationError):
    """Momentum parameters for which theta is undefined"""


class UsageError(MarkovZOError, ValueError):
    """An operation was called with arguments outside its contract"""


class InfeasibleTargetError(MarkovZOError):
    """Requested accuracy lies below the adversarial noise floor"""


class DivergenceError(MarkovZOError, ArithmeticError):
    """
    Iterates left the divergence guard or became non-finite

    Attributes:
        iteration: Index of the iteration that produced the bad iterate
        record: Partial RunRecord up to (and excluding) that iteration
    """

    def __init__(self, message: str, iteration: int, record: Optional[Any] = None):
        super().__init__(message)
        self.iteration = iteration
        self.record = record
