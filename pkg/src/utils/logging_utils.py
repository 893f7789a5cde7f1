"""
Logging utilities for the markov-zo toolkit
"""

import logging
import sys
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Iterator, Optional

# Third-party loggers that flood DEBUG output during heatmap rendering
_NOISY_LOGGERS = ("matplotlib", "PIL", "fontTools")


def setup_logging(
    log_dir: str | Path = "results/logs",
    log_level: int = logging.INFO,
    log_to_file: bool = True,
    log_to_console: bool = True,
) -> Optional[Path]:
    """
    Configure the root logger for a toolkit session

    Args:
        log_dir: Directory to store log files
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_to_file: Whether to log to a timestamped file
        log_to_console: Whether to log to stdout

    Returns:
        Path of the log file, or None when file logging is disabled
    """
    detailed_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    simple_formatter = logging.Formatter('%(levelname)s - %(message)s')

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    root_logger.handlers.clear()

    log_file = None
    if log_to_file:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        log_file = log_dir / f"markov_zo_{timestamp}.log"

        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(log_level)
        file_handler.setFormatter(detailed_formatter)
        root_logger.addHandler(file_handler)

    if log_to_console:
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(log_level)
        console_handler.setFormatter(simple_formatter)
        root_logger.addHandler(console_handler)

    for name in _NOISY_LOGGERS:
        logging.getLogger(name).setLevel(max(log_level, logging.WARNING))

    return log_file


def get_logger(name: str) -> logging.Logger:
    """Module logger; handlers and levels come from setup_logging"""
    return logging.getLogger(name)


def log_banner(logger: logging.Logger, title: str, width: int = 60) -> None:
    """Log a section title framed by '=' rules"""
    logger.info("=" * width)
    logger.info(title)
    logger.info("=" * width)


@contextmanager
def with_log_level(logger: logging.Logger, level: int) -> Iterator[logging.Logger]:
    """
    Temporarily set a logger's level, restoring it on exit

    Used to silence the per-round DEBUG lines of run_with_restarts inside
    oracle-complexity sweeps.
    """
    previous = logger.level
    logger.setLevel(level)
    try:
        yield logger
    finally:
        logger.setLevel(previous)
