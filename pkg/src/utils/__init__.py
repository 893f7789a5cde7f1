"""
Utility modules for the markov-zo toolkit
"""

from .config_loader import (
    load_yaml,
    load_config,
    load_paths_config,
    expand_dotted_keys,
    substitute_variables,
    parse_grid,
    get_project_root,
)
from .logging_utils import get_logger, setup_logging, log_banner, with_log_level
from .io_utils import read_csv, write_csv, ensure_dir

__all__ = [
    # Config loader
    "load_yaml",
    "load_config",
    "load_paths_config",
    "expand_dotted_keys",
    "substitute_variables",
    "parse_grid",
    "get_project_root",
    # Logging
    "get_logger",
    "setup_logging",
    "log_banner",
    "with_log_level",
    # IO
    "read_csv",
    "write_csv",
    "ensure_dir",
]
