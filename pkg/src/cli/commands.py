"""
Command-line front end

    grid   <config> [--full] [--threads N]   seeded (d, tau, sigma2) grid -> CSV + SVG heatmaps
    run    <config> [--seed S] [--output P]  single run -> trajectory CSV
    verify <suite>  [--seed S] [--output P]  diagnostics suite -> report CSV
    tune   --epsilon E [problem flags]       theorem tuning -> parameter table

Exit codes: 0 success, 1 failed verification or diverged run, 2 usage or
configuration error, 3 infeasible target, 4 I/O error.
"""

import argparse
import logging
import math
from pathlib import Path
from typing import List, Optional

import pandas as pd

from ..analysis.heatmaps import write_grid_heatmaps
from ..analysis.scaling import fit_scaling_models
from ..diagnostics.suites import run_suite
from ..errors import (
    ConfigurationError,
    DivergenceError,
    InfeasibleTargetError,
    UsageError,
)
from ..estimators.finite_difference import Feedback
from ..experiments.config import load_experiment_config
from ..experiments.grid import cell_setup, run_grid, run_replication, write_grid_csv
from ..optimizer.tuning import tune_theorem
from ..problems.base import ProblemKind, ProblemSpec
from ..utils.config_loader import load_paths_config
from ..utils.io_utils import write_csv
from ..utils.logging_utils import get_logger, log_banner, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

RUN_FLOAT_FORMAT = "%.17g"


# ============================================================================
# Subcommands
# ============================================================================

def cmd_grid(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config, full=args.full)
    log_banner(logger, f"GRID: {config.n_cells} cells, {config.optimizer.replications} replications")

    frame = run_grid(config, threads=args.threads)
    write_grid_csv(frame, config.output.csv_path)
    if config.output.heatmaps:
        write_grid_heatmaps(frame, config.output.results_dir, config.output.heatmap_prefix)

    n_nan = int(frame['mean_error'].isna().sum())
    if n_nan:
        logger.warning(f"{n_nan} cells diverged and were written as nan")
    fits = fit_scaling_models(frame)
    if not fits.empty:
        log_banner(logger, "SCALING FITS")
        for line in fits.to_string(index=False).splitlines():
            logger.info(line)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config)
    d, tau, sigma2 = config.single_cell()
    problem, chain, params = cell_setup(config, d, tau, sigma2)
    seed = config.optimizer.seed_base if args.seed is None else args.seed
    output = Path(args.output) if args.output else config.output.trajectory_path

    log_banner(logger, f"RUN: {problem.kind.value} d={d} tau={tau} sigma2={sigma2:g} N={params.N} seed={seed}")
    status = EXIT_OK
    try:
        record = run_replication(config, problem, chain, params, seed)
    except DivergenceError as exc:
        logger.error(f"Run diverged at iteration {exc.iteration}; writing the partial trajectory")
        record = exc.record
        status = EXIT_FAILED
        if record is None:
            return status

    write_csv(record.to_frame(), output, float_format=RUN_FLOAT_FORMAT)
    logger.info(f"Final ||x^N - x*||^2 = {record.final_error:.6e} after {record.n_iterations} iterations, "
                f"{record.total_oracle_calls} oracle calls")
    return status


def cmd_verify(args: argparse.Namespace) -> int:
    log_banner(logger, f"VERIFY: {args.suite} (seed={args.seed})")
    reports = run_suite(args.suite, seed=args.seed)
    table = pd.concat([report.to_frame() for report in reports], ignore_index=True)

    output = Path(args.output) if args.output else Path(
        load_paths_config().get('reports_dir', 'results/reports')) / f"verify_{args.suite}.csv"
    write_csv(table, output)

    failed = [f"{row.report}/{row.check}" for row in table.itertuples() if row.status == 'FAIL']
    n_warn = int((table['status'] == 'WARNING').sum())
    log_banner(logger, "SUMMARY")
    logger.info(f"Checks: {len(table)}, failed: {len(failed)}, warnings: {n_warn}")
    for name in failed:
        logger.error(f"  ✗ {name}")
    return EXIT_OK if not failed else EXIT_FAILED


def cmd_tune(args: argparse.Namespace) -> int:
    smooth = not args.non_smooth
    if smooth and args.L is None:
        raise UsageError("--L is required for smooth tuning")
    if not smooth and args.G is None:
        raise UsageError("--G is required with --non-smooth")
    spec = ProblemSpec(kind=ProblemKind(args.problem), dim=args.dim, mu=args.mu, lips_grad=args.L, lips_f=args.G)

    result = tune_theorem(spec, args.epsilon, B=args.B, feedback=Feedback(args.feedback), smooth=smooth,
                          delta=args.delta, tau=args.tau, sigma_sq=args.sigma2)

    table = pd.DataFrame([
        ('gamma', result.gamma),
        ('t', result.t),
        ('p', result.p),
        ('delta_max', result.delta_max),
        ('L', result.L),
        ('predicted_iterations', result.predicted_iterations),
        ('predicted_oracle_calls', result.predicted_oracle_calls),
    ], columns=['parameter', 'value'])
    print(table.to_string(index=False, float_format=lambda v: f"{v:.6g}"))
    return EXIT_OK


# ============================================================================
# Parser and entry point
# ============================================================================

def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return number


def _positive_float(value: str) -> float:
    number = float(value)
    if not number > 0 or not math.isfinite(number):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mzo",
        description="Accelerated zero-order optimization under Markovian noise",
    )
    parser.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Logging level (default: INFO)')
    parser.add_argument('--no-log-file', action='store_true', help='Log to the console only')
    sub = parser.add_subparsers(dest='command', required=True)

    grid = sub.add_parser('grid', help='Run the (d, tau, sigma2) experiment grid')
    grid.add_argument('config', help='Experiment YAML config')
    grid.add_argument('--full', action='store_true', help='Use optimizer.full_replications')
    grid.add_argument('--threads', type=_positive_int, default=None,
                      help='Worker processes (default: MZ_THREADS or CPU count)')
    grid.set_defaults(handler=cmd_grid)

    run = sub.add_parser('run', help='Single seeded run, trajectory CSV')
    run.add_argument('config', help='Experiment YAML config')
    run.add_argument('--seed', type=int, default=None, help='Override optimizer.seed_base')
    run.add_argument('--output', default=None, help='Trajectory CSV path (default: output.trajectory)')
    run.set_defaults(handler=cmd_run)

    verify = sub.add_parser('verify', help='Run a diagnostics suite')
    verify.add_argument('suite', help='chains | estimators | smoothing | mlmc | optimizer | all')
    verify.add_argument('--seed', type=int, default=0)
    verify.add_argument('--output', default=None, help='Report CSV path')
    verify.set_defaults(handler=cmd_verify)

    tune = sub.add_parser('tune', help='Theorem tuning rules for a target accuracy')
    tune.add_argument('--epsilon', type=_positive_float, required=True)
    tune.add_argument('--problem', default=ProblemKind.QUADRATIC_MARKOV.value,
                      choices=[k.value for k in ProblemKind])
    tune.add_argument('--dim', type=_positive_int, default=1)
    tune.add_argument('--mu', type=_positive_float, default=1.0)
    tune.add_argument('--L', type=_positive_float, default=None, help='Gradient Lipschitz constant')
    tune.add_argument('--G', type=_positive_float, default=None, help='Function Lipschitz constant')
    tune.add_argument('--B', type=_positive_int, default=1)
    tune.add_argument('--feedback', default=Feedback.TWO_POINT.value, choices=[f.value for f in Feedback])
    tune.add_argument('--non-smooth', action='store_true', help='Use the non-smooth tuning rules')
    tune.add_argument('--delta', type=float, default=0.0, help='Declared adversarial bound')
    tune.add_argument('--tau', type=_positive_int, default=1)
    tune.add_argument('--sigma2', type=float, default=0.0)
    tune.set_defaults(handler=cmd_tune)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    paths = load_paths_config()
    setup_logging(
        log_dir=paths.get('logs_dir', 'results/logs'),
        log_level=getattr(logging, args.log_level),
        log_to_file=not args.no_log_file,
    )

    try:
        return args.handler(args)
    except InfeasibleTargetError as e:
        logger.error(str(e))
        return EXIT_INFEASIBLE
    except (UsageError, ConfigurationError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE
    except (FileNotFoundError, OSError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
