"""
Command-line front end: grid, run, verify and tune subcommands
"""

from .commands import (
    EXIT_OK,
    EXIT_FAILED,
    EXIT_USAGE,
    EXIT_INFEASIBLE,
    EXIT_IO,
    build_parser,
    cmd_grid,
    cmd_run,
    cmd_verify,
    cmd_tune,
    main,
)

__all__ = [
    "EXIT_OK",
    "EXIT_FAILED",
    "EXIT_USAGE",
    "EXIT_INFEASIBLE",
    "EXIT_IO",
    "build_parser",
    "cmd_grid",
    "cmd_run",
    "cmd_verify",
    "cmd_tune",
    "main",
]
