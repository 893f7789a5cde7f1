"""
Moment reports and the small statistics shared by the diagnostics checks

Checks are result dicts {'status', 'message', 'details'} as produced by the
problem validators. A report FAILS only when one of its checks has status
'FAIL'; 'WARNING' rows are informational.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from ..errors import UsageError


def check_result(ok: bool, message: str, details: Optional[Dict[str, Any]] = None,
                 warn: bool = False) -> Dict[str, Any]:
    status = 'PASS' if ok else ('WARNING' if warn else 'FAIL')
    return {'status': status, 'message': message, 'details': details or {}}


@dataclass
class MomentReport:
    """
    Empirical moments of one diagnostic quantity

    Attributes:
        name: Quantity being estimated
        mean: Empirical mean (vector or scalar)
        second_moment: Empirical second moment or mean squared error
        standard_error: Standard error of `mean`
        replications: Number of independent replications
        slopes: Fitted log-log scaling exponents, keyed by axis
        checks: Named check results
        rows: Per-point measurements behind the fits
    """
    name: str
    mean: Optional[np.ndarray] = None
    second_moment: Optional[float] = None
    standard_error: Optional[np.ndarray] = None
    replications: int = 0
    slopes: Dict[str, float] = field(default_factory=dict)
    checks: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    rows: List[Dict[str, Any]] = field(default_factory=list)

    def add_check(self, key: str, ok: bool, message: str, warn: bool = False, **details) -> Dict[str, Any]:
        self.checks[key] = check_result(ok, message, details, warn)
        return self.checks[key]

    @property
    def passed(self) -> bool:
        return all(check['status'] != 'FAIL' for check in self.checks.values())

    @property
    def failures(self) -> List[str]:
        return [key for key, check in self.checks.items() if check['status'] == 'FAIL']

    def to_frame(self) -> pd.DataFrame:
        """One row per check: report, check, status, value, expected, message"""
        rows = []
        for key, check in self.checks.items():
            details = check['details']
            rows.append({
                'report': self.name,
                'check': key,
                'status': check['status'],
                'value': details.get('value', np.nan),
                'expected': details.get('expected', np.nan),
                'message': check['message'],
            })
        return pd.DataFrame(rows, columns=['report', 'check', 'status', 'value', 'expected', 'message'])

    def rows_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)


# ============================================================================
# Statistics
# ============================================================================

def standard_error(samples: np.ndarray, axis: int = 0) -> np.ndarray:
    """Standard error of the mean along `axis` (ddof=1)"""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    if n < 2:
        raise UsageError(f"Need at least 2 replications for a standard error, got {n}")
    return samples.std(axis=axis, ddof=1) / math.sqrt(n)


def variance_with_se(samples: np.ndarray) -> Tuple[float, float]:
    """Unbiased variance of scalar samples and its large-sample standard error"""
    samples = np.asarray(samples, dtype=float).ravel()
    n = samples.size
    if n < 2:
        raise UsageError(f"Need at least 2 replications for a variance, got {n}")
    centered = samples - samples.mean()
    variance = float(centered @ centered / (n - 1))
    fourth = float(np.mean(centered ** 4))
    se = math.sqrt(max(fourth - variance ** 2, 0.0) / n)
    return variance, se


def within_se(value, expected, se, k: float = 3.0, floor: float = 0.0) -> bool:
    """|value - expected| <= k * se + floor, componentwise"""
    gap = np.abs(np.asarray(value, dtype=float) - np.asarray(expected, dtype=float))
    return bool(np.all(gap <= k * np.asarray(se, dtype=float) + floor))


def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> Dict[str, float]:
    """
    Least-squares fit of log y = intercept + slope * log x

    Raises:
        UsageError: On fewer than two points or non-positive values
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or x.size != y.size:
        raise UsageError(f"Need two or more matched points for a slope, got {x.size} and {y.size}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise UsageError("Log-log fit needs strictly positive values")
    fit = stats.linregress(np.log(x), np.log(y))
    return {
        'slope': float(fit.slope),
        'intercept': float(fit.intercept),
        'r_squared': float(fit.rvalue ** 2),
        'slope_stderr': float(fit.stderr),
    }
