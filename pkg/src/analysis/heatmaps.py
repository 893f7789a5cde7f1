"""
SVG heatmaps of grid results

One heatmap per sigma2: rows are dimensions d, columns are mixing times tau,
colour is log-scaled mean error. Each SVG carries the plotted values in its
Dublin-Core description as

    d=<d>;tau=<tau>;value=<6 significant digits>|...

so the numbers can be read back without the CSV.
"""

import re
from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

from ..errors import UsageError  # noqa: E402
from ..utils.io_utils import ensure_dir  # noqa: E402
from ..utils.logging_utils import get_logger  # noqa: E402

logger = get_logger(__name__)

_DESCRIPTION = re.compile(r"<dc:description>(.*?)</dc:description>", re.DOTALL)


def _format_value(value: float) -> str:
    return "nan" if not np.isfinite(value) else f"{value:.6g}"


def encode_annotations(pivot: pd.DataFrame) -> str:
    """Cell values of a d x tau pivot as the description string"""
    cells = []
    for d in pivot.index:
        for tau in pivot.columns:
            cells.append(f"d={int(d)};tau={int(tau)};value={_format_value(float(pivot.loc[d, tau]))}")
    return "|".join(cells)


def heatmap_pivot(frame: pd.DataFrame, sigma2: float, value: str = 'mean_error') -> pd.DataFrame:
    subset = frame[np.isclose(frame['sigma2'], sigma2, rtol=1e-12, atol=0.0)]
    if subset.empty:
        raise UsageError(f"No grid rows with sigma2={sigma2:g}")
    return subset.pivot(index='d', columns='tau', values=value).sort_index().sort_index(axis=1)


def write_heatmap_svg(frame: pd.DataFrame, sigma2: float, path: str | Path,
                      value: str = 'mean_error') -> Path:
    """
    Draw the log-coloured d x tau heatmap of one sigma2 slice

    Divergent (NaN) cells are left blank and encoded as "nan".

    Returns:
        Path written
    """
    path = Path(path)
    ensure_dir(path.parent)
    pivot = heatmap_pivot(frame, sigma2, value)

    values = pivot.to_numpy(dtype=float)
    positive = values[np.isfinite(values) & (values > 0)]
    norm = LogNorm(vmin=positive.min(), vmax=positive.max()) if positive.size else None
    if norm is not None and positive.min() == positive.max():
        norm = LogNorm(vmin=positive.min() / 10.0, vmax=positive.max() * 10.0)

    plt.rcParams['svg.hashsalt'] = 'markov-zo'
    fig, ax = plt.subplots(figsize=(1.0 + 0.7 * pivot.shape[1], 1.0 + 0.6 * pivot.shape[0]))
    try:
        sns.heatmap(pivot, ax=ax, norm=norm, cmap="viridis", cbar_kws={'label': value})
        ax.invert_yaxis()
        ax.set_xlabel("mixing time tau")
        ax.set_ylabel("dimension d")
        ax.set_title(f"{value}, sigma2 = {sigma2:g}")
        fig.tight_layout()
        fig.savefig(path, format="svg",
                    metadata={'Description': encode_annotations(pivot), 'Date': None})
    except OSError as e:
        raise OSError(f"Cannot write {path}: {e}") from e
    finally:
        plt.close(fig)

    logger.info(f"Saved heatmap to {path}")
    return path


def read_heatmap_annotations(path: str | Path) -> pd.DataFrame:
    """
    Parse the embedded cell values of a heatmap SVG

    Returns:
        DataFrame with columns d, tau, value (NaN for divergent cells)
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    match = _DESCRIPTION.search(text)
    if match is None:
        raise UsageError(f"{path} carries no cell annotations")

    rows: List[dict] = []
    for cell in match.group(1).strip().split("|"):
        fields = dict(item.split("=", 1) for item in cell.split(";"))
        rows.append({'d': int(fields['d']), 'tau': int(fields['tau']), 'value': float(fields['value'])})
    return pd.DataFrame(rows, columns=['d', 'tau', 'value'])


def write_grid_heatmaps(frame: pd.DataFrame, output_dir: str | Path, prefix: str = "heatmap") -> List[Path]:
    """One SVG per sigma2 value found in the frame"""
    output_dir = Path(output_dir)
    return [
        write_heatmap_svg(frame, sigma2, output_dir / f"{prefix}_sigma2_{sigma2:g}.svg")
        for sigma2 in sorted(frame['sigma2'].unique(), reverse=True)
    ]
