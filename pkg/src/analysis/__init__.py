"""
Analysis of grid output: heatmaps and scaling-model fits
"""

from .heatmaps import (
    encode_annotations,
    heatmap_pivot,
    write_heatmap_svg,
    write_grid_heatmaps,
    read_heatmap_annotations,
)
from .scaling import (
    SCALING_MODELS,
    fit_scaling_models,
    preferred_model,
    doubling_ratios,
    tau_spread,
)

__all__ = [
    # Heatmaps
    "encode_annotations",
    "heatmap_pivot",
    "write_heatmap_svg",
    "write_grid_heatmaps",
    "read_heatmap_annotations",
    # Scaling
    "SCALING_MODELS",
    "fit_scaling_models",
    "preferred_model",
    "doubling_ratios",
    "tau_spread",
]
