"""Interpretable recommendations from psychometric assessments.

Assessment scores become polygons on the unit disc, a partition of the
disc turns each polygon into an area-coverage feature vector, and linear
weights per label reconstruct assignments from those features. Every
prediction carries the data needed to draw a faithful explanation diagram.
"""

__version__ = "0.1.0"

from .core import (
    PolygridConfig,
    PolygridInstance,
    Prediction,
    default_grid,
    downgrade,
    fit,
    fit_labelranking,
    fit_multilabel,
    logranks,
    order_vertices,
    predict,
)
from .geometry import (
    DiscPartition,
    cell_coverage,
    partition_ud,
    polygon_area,
    roots_of_unity,
    uh_to_ud,
)
from .solvers import SolverKind, predict_linear, solve_weights

__all__ = [
    "PolygridConfig",
    "PolygridInstance",
    "Prediction",
    "SolverKind",
    "DiscPartition",
    "cell_coverage",
    "default_grid",
    "downgrade",
    "fit",
    "fit_labelranking",
    "fit_multilabel",
    "logranks",
    "order_vertices",
    "partition_ud",
    "polygon_area",
    "predict",
    "predict_linear",
    "roots_of_unity",
    "solve_weights",
    "uh_to_ud",
    "__version__",
]
