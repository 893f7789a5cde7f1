"""
Scaling-model fits on grid output

The stochastic part of the error is expected to grow like (d + tau), not
d * tau; these helpers compare the two linear models per sigma2 and measure
how the error responds to doubling d or varying tau.
"""

from typing import Dict

import numpy as np
import pandas as pd
from scipy import stats

from ..errors import UsageError
from ..utils.logging_utils import get_logger

logger = get_logger(__name__)

SCALING_MODELS = {
    'd_plus_tau': lambda frame: frame['d'] + frame['tau'],
    'd_times_tau': lambda frame: frame['d'] * frame['tau'],
}


def _finite_rows(frame: pd.DataFrame, value: str) -> pd.DataFrame:
    missing = {'d', 'tau', 'sigma2', value} - set(frame.columns)
    if missing:
        raise UsageError(f"Grid frame lacks columns {sorted(missing)}")
    return frame[np.isfinite(frame[value])]


def fit_scaling_models(frame: pd.DataFrame, value: str = 'mean_error') -> pd.DataFrame:
    """
    Least-squares fits value ~ a + b * (d + tau) and value ~ a + b * d * tau

    Returns:
        One row per (sigma2, model): intercept, slope, r_squared, n_cells
    """
    rows = []
    for sigma2, group in _finite_rows(frame, value).groupby('sigma2', sort=True):
        for model, regressor in SCALING_MODELS.items():
            x = regressor(group).to_numpy(dtype=float)
            y = group[value].to_numpy(dtype=float)
            if len(group) < 3 or np.ptp(x) == 0:
                logger.warning(f"sigma2={sigma2:g}: not enough distinct cells to fit {model}")
                continue
            fit = stats.linregress(x, y)
            rows.append({
                'sigma2': sigma2,
                'model': model,
                'intercept': float(fit.intercept),
                'slope': float(fit.slope),
                'r_squared': float(fit.rvalue ** 2),
                'n_cells': len(group),
            })
    return pd.DataFrame(rows, columns=['sigma2', 'model', 'intercept', 'slope', 'r_squared', 'n_cells'])


def preferred_model(fits: pd.DataFrame) -> Dict[float, str]:
    """Model with the higher R^2 for each sigma2"""
    best = fits.loc[fits.groupby('sigma2')['r_squared'].idxmax()]
    return dict(zip(best['sigma2'], best['model']))


def doubling_ratios(frame: pd.DataFrame, value: str = 'mean_error') -> pd.DataFrame:
    """
    value(2d, tau) / value(d, tau) for every d whose double is on the grid

    Returns:
        Columns sigma2, tau, d, ratio
    """
    rows = []
    for sigma2, group in _finite_rows(frame, value).groupby('sigma2', sort=True):
        table = group.set_index(['d', 'tau'])[value]
        for (d, tau), current in table.items():
            doubled = (2 * d, tau)
            if doubled in table.index and current > 0:
                rows.append({'sigma2': sigma2, 'tau': tau, 'd': d, 'ratio': float(table[doubled] / current)})
    return pd.DataFrame(rows, columns=['sigma2', 'tau', 'd', 'ratio'])


def tau_spread(frame: pd.DataFrame, value: str = 'mean_error') -> pd.DataFrame:
    """
    Relative spread (max - min) / min of value across tau at each (sigma2, d)

    A flat row (small spread) means the error does not depend on the mixing time.
    """
    rows = []
    for (sigma2, d), group in _finite_rows(frame, value).groupby(['sigma2', 'd'], sort=True):
        low, high = float(group[value].min()), float(group[value].max())
        rows.append({'sigma2': sigma2, 'd': d, 'spread': (high - low) / low if low > 0 else np.inf,
                     'mean': float(group[value].mean())})
    return pd.DataFrame(rows, columns=['sigma2', 'd', 'spread', 'mean'])
