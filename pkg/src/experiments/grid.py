"""
Grid engine: seeded replications of the accelerated method over (d, tau, sigma2)

Every replication draws its seed from SeedSequence([seed_base, d, tau,
sigma_index, rep]), so a cell's numbers do not depend on the order in which
cells are scheduled or on the size of the work pool.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..chains.lazy_chain import ChainParams
from ..errors import ConfigurationError, DivergenceError
from ..optimizer.accelerated import RunRecord, run
from ..optimizer.params import MomentumParams, derive_params
from ..optimizer.tuning import run_with_restarts, tune_theorem
from ..problems.base import Problem
from ..problems.registry import build_problem, spec_from_config
from ..utils.io_utils import write_csv
from ..utils.logging_utils import get_logger
from .config import ExperimentConfig

logger = get_logger(__name__)

GRID_COLUMNS = ['d', 'tau', 'sigma2', 'mean_error', 'se_error', 'mean_oracle_calls', 'seed_base']
THREADS_ENV = "MZ_THREADS"


@dataclass(frozen=True)
class GridCell:
    d: int
    tau: int
    sigma2: float
    sigma_index: int


def grid_cells(config: ExperimentConfig) -> List[GridCell]:
    """Cells in (sigma2, d, tau) order"""
    return [
        GridCell(d=d, tau=tau, sigma2=sigma2, sigma_index=i)
        for (i, sigma2), d, tau in product(enumerate(config.chain.sigma2_grid),
                                           config.problem.dim_grid, config.chain.tau_grid)
    ]


def replication_seed(seed_base: int, cell: GridCell, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed_base, cell.d, cell.tau, cell.sigma_index, rep])


def cell_setup(config: ExperimentConfig, d: int, tau: int,
               sigma2: float) -> Tuple[Problem, ChainParams, MomentumParams]:
    """
    Problem, noise chain and parameters of one (d, tau, sigma2) cell

    The chain's per-coordinate deviation is sqrt(sigma2 / d), so that
    E||Z||^2 = sigma2.

    Raises:
        ConfigurationError: If the problem lacks the constant the parameters need
    """
    problem = build_problem(spec_from_config(config.problem.section(), d))
    chain = ChainParams(kind=config.chain.kind, dim=problem.noise_dim, tau_hold=tau,
                        noise_std=math.sqrt(sigma2 / problem.noise_dim))
    est, opt = config.estimator, config.optimizer

    if opt.gamma is None:
        tuning = tune_theorem(problem, opt.epsilon, B=est.B, feedback=est.feedback, smooth=est.smooth,
                              tau=tau, sigma_sq=sigma2)
        return problem, chain, tuning.to_params(N=opt.N)

    lipschitz = problem.smoothness if est.smooth else problem.lipschitz
    if lipschitz is None:
        raise ConfigurationError(
            f"{problem.kind.value} has no {'gradient' if est.smooth else 'function'} Lipschitz constant; "
            f"set estimator.smooth accordingly"
        )
    params = derive_params(problem.strong_convexity, lipschitz, opt.gamma, est.t, B=est.B, p=opt.p,
                           feedback=est.feedback, smooth=est.smooth, dim=d, N=opt.N)
    return problem, chain, params


def run_replication(config: ExperimentConfig, problem: Problem, chain: ChainParams,
                    params: MomentumParams, seed) -> RunRecord:
    """One seeded run, restarted when the config asks for it"""
    opt = config.optimizer
    if opt.restarts:
        return run_with_restarts(problem, chain, params, opt.epsilon, seed, initial_error=opt.initial_error)
    return run(problem, chain, params, seed, initial_error=opt.initial_error)


def run_grid_cell(config: ExperimentConfig, cell: GridCell) -> Dict[str, float]:
    """
    All replications of one cell

    Returns:
        CSV row; mean_error and se_error are NaN when any replication diverged
    """
    problem, chain, params = cell_setup(config, cell.d, cell.tau, cell.sigma2)
    reps = config.optimizer.replications
    errors = np.empty(reps)
    calls = np.empty(reps)

    for rep in range(reps):
        seed = replication_seed(config.optimizer.seed_base, cell, rep)
        try:
            record = run_replication(config, problem, chain, params, seed)
            errors[rep] = record.best_error
            calls[rep] = record.total_oracle_calls
        except DivergenceError as exc:
            logger.warning(f"Cell d={cell.d} tau={cell.tau} sigma2={cell.sigma2:g}: "
                           f"replication {rep} diverged at iteration {exc.iteration}")
            errors[rep] = np.nan
            calls[rep] = exc.record.total_oracle_calls if exc.record is not None else np.nan

    diverged = not np.all(np.isfinite(errors))
    mean_error = np.nan if diverged else float(errors.mean())
    se_error = np.nan if diverged or reps < 2 else float(errors.std(ddof=1) / math.sqrt(reps))
    logger.debug(f"Cell d={cell.d} tau={cell.tau} sigma2={cell.sigma2:g}: error={mean_error:.4g}")
    return {
        'd': cell.d,
        'tau': cell.tau,
        'sigma2': cell.sigma2,
        'mean_error': mean_error,
        'se_error': se_error,
        'mean_oracle_calls': float(np.nanmean(calls)) if np.any(np.isfinite(calls)) else np.nan,
        'seed_base': config.optimizer.seed_base,
    }


def pool_size(n_cells: int, threads: Optional[int] = None) -> int:
    """Work-pool size capped by MZ_THREADS (default: CPU count)"""
    if threads is None:
        raw = os.environ.get(THREADS_ENV)
        if raw:
            try:
                threads = int(raw)
            except ValueError:
                raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}")
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise ConfigurationError(f"{THREADS_ENV} must be >= 1, got {threads}")
    return max(1, min(threads, n_cells))


def run_grid(config: ExperimentConfig, threads: Optional[int] = None) -> pd.DataFrame:
    """
    Evaluate every cell of the grid

    Cells run in a process pool; rows are collected in grid order so the
    table does not depend on completion order.

    Returns:
        DataFrame with GRID_COLUMNS, one row per cell
    """
    cells = grid_cells(config)
    workers = pool_size(len(cells), threads)
    logger.info(f"Grid: {len(cells)} cells x {config.optimizer.replications} replications, {workers} workers")

    rows: List[Dict[str, float]] = []
    if workers == 1:
        for i, cell in enumerate(cells, start=1):
            rows.append(run_grid_cell(config, cell))
            logger.info(f"[{i}/{len(cells)}] d={cell.d} tau={cell.tau} sigma2={cell.sigma2:g} "
                        f"error={rows[-1]['mean_error']:.4g}")
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_grid_cell, config, cell) for cell in cells]
            for i, (cell, future) in enumerate(zip(cells, futures), start=1):
                rows.append(future.result())
                logger.info(f"[{i}/{len(cells)}] d={cell.d} tau={cell.tau} sigma2={cell.sigma2:g} "
                            f"error={rows[-1]['mean_error']:.4g}")

    return pd.DataFrame(rows, columns=GRID_COLUMNS)


def write_grid_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    """Fixed header, decimal floats, "nan" for divergent cells"""
    return write_csv(frame[GRID_COLUMNS], path, float_format="%.10g")
