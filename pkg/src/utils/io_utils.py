"""
I/O utilities for reading and writing result tables
"""

from pathlib import Path
from typing import Optional

import pandas as pd

from .logging_utils import get_logger

logger = get_logger(__name__)


def ensure_dir(path: str | Path) -> Path:
    """
    Ensure directory exists, create if not

    Args:
        path: Directory path

    Returns:
        Path object
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def read_csv(
    path: str | Path,
    index_col: Optional[int | str] = None,
    **kwargs
) -> pd.DataFrame:
    """
    Read a result CSV

    The "nan" sentinel written for divergent cells is parsed back as NaN.

    Args:
        path: Path to CSV file
        index_col: Column to use as index
        **kwargs: Additional arguments for pd.read_csv

    Returns:
        DataFrame
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    logger.debug(f"Reading CSV: {path}")
    df = pd.read_csv(path, index_col=index_col, na_values=["nan"], **kwargs)
    logger.debug(f"Loaded {len(df)} rows, {len(df.columns)} columns")
    return df


def write_csv(
    df: pd.DataFrame,
    path: str | Path,
    float_format: str = "%.10g",
    **kwargs
) -> Path:
    """
    Write DataFrame to CSV with a stable, diffable layout

    UTF-8, LF line endings, no index, NaN written as "nan".

    Args:
        df: DataFrame to write
        path: Output path
        float_format: printf-style float format
        **kwargs: Additional arguments for DataFrame.to_csv

    Returns:
        Path written

    Raises:
        OSError: If the output location is not writable
    """
    path = Path(path)
    ensure_dir(path.parent)

    logger.debug(f"Writing CSV: {path} ({len(df)} rows)")
    try:
        df.to_csv(
            path,
            index=False,
            float_format=float_format,
            na_rep="nan",
            lineterminator="\n",
            encoding="utf-8",
            **kwargs,
        )
    except OSError as e:
        raise OSError(f"Cannot write {path}: {e}") from e

    logger.info(f"Saved to {path}")
    return path
