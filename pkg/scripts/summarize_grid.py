"""
Summarize a grid CSV

Fits the (d + tau) and d * tau error models per noise level, reports the
doubling-d ratios and the spread of the error across tau, and re-renders
the heatmaps.

Usage:
    python scripts/summarize_grid.py results/grids/tau_dim_grid.csv
    python scripts/summarize_grid.py results/grids/tau_dim_grid.csv --no-heatmaps
"""

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import argparse

from src.analysis.heatmaps import write_grid_heatmaps
from src.analysis.scaling import doubling_ratios, fit_scaling_models, preferred_model, tau_spread
from src.utils.io_utils import read_csv, write_csv
from src.utils.logging_utils import get_logger, log_banner, setup_logging

# Setup logging
setup_logging()
logger = get_logger(__name__)


def main():
    parser = argparse.ArgumentParser(description="Summarize a markov-zo grid CSV")
    parser.add_argument('grid_csv', type=str, help='Grid CSV written by `mzo.py grid`')
    parser.add_argument('--output-dir', type=str, default=None,
                        help='Where to write the summary tables (default: next to the CSV)')
    parser.add_argument('--no-heatmaps', action='store_true', help='Skip re-rendering the heatmaps')
    args = parser.parse_args()

    grid_path = Path(args.grid_csv)
    try:
        frame = read_csv(grid_path)
    except FileNotFoundError as e:
        logger.error(str(e))
        return 4
    output_dir = Path(args.output_dir) if args.output_dir else grid_path.parent
    stem = grid_path.stem

    log_banner(logger, f"Grid summary: {grid_path.name} ({len(frame)} cells)")
    n_nan = int(frame['mean_error'].isna().sum())
    if n_nan:
        logger.warning(f"{n_nan} divergent cells excluded from the fits")

    fits = fit_scaling_models(frame)
    ratios = doubling_ratios(frame)
    spread = tau_spread(frame)

    write_csv(fits, output_dir / f"{stem}_fits.csv")
    write_csv(ratios, output_dir / f"{stem}_doubling.csv")
    write_csv(spread, output_dir / f"{stem}_tau_spread.csv")

    log_banner(logger, "Scaling models")
    for line in fits.to_string(index=False).splitlines():
        logger.info(line)
    for sigma2, model in preferred_model(fits).items():
        logger.info(f"  sigma2={sigma2:g}: best model {model}")

    log_banner(logger, "Error spread across tau")
    for row in spread.itertuples():
        logger.info(f"  sigma2={row.sigma2:g} d={row.d}: spread {row.spread:.1%}, mean {row.mean:.4g}")

    if not args.no_heatmaps:
        write_grid_heatmaps(frame, output_dir, prefix=f"{stem}_heatmap")

    return 0


if __name__ == '__main__':
    sys.exit(main())
