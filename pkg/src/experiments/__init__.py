"""
Experiment configs and the seeded (d, tau, sigma2) grid engine
"""

from .config import (
    ExperimentConfig,
    ProblemBlock,
    ChainBlock,
    EstimatorBlock,
    OptimizerBlock,
    OutputBlock,
    experiment_from_dict,
    load_experiment_config,
)
from .grid import (
    GRID_COLUMNS,
    GridCell,
    grid_cells,
    replication_seed,
    cell_setup,
    run_replication,
    run_grid_cell,
    run_grid,
    pool_size,
    write_grid_csv,
)

__all__ = [
    # Config
    "ExperimentConfig",
    "ProblemBlock",
    "ChainBlock",
    "EstimatorBlock",
    "OptimizerBlock",
    "OutputBlock",
    "experiment_from_dict",
    "load_experiment_config",
    # Grid
    "GRID_COLUMNS",
    "GridCell",
    "grid_cells",
    "replication_seed",
    "cell_setup",
    "run_replication",
    "run_grid_cell",
    "run_grid",
    "pool_size",
    "write_grid_csv",
]
