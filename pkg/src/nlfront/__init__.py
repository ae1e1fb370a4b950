"""Level-set simulation of fronts driven by a line-integral nonlocal speed
with optional mean-curvature regularization."""
from .contour import Polyline, extract_contour, hausdorff, row_extent
from .evolve import EvolveOptions, InstabilityError, StepReport, Trajectory, evolve, stable_dt, step
from .front_init import Annulus, Disk, Rectangle, boundary_points, perturb, rasterize, signed_distance
from .grid import GridSpec, ScalarField, make_grid, read_snapshot, write_snapshot
from .linesets import (RowMeasureIndex, WeightTable, build_row_index, load_weight_table,
                       row_superlevel, set_distance, weighted_measure)
from .velocity import VelocityParams, rhs, rhs_at

__version__ = "0.1.0"

__all__ = [
    "Annulus", "Disk", "EvolveOptions", "GridSpec", "InstabilityError", "Polyline", "Rectangle",
    "RowMeasureIndex", "ScalarField", "StepReport", "Trajectory", "VelocityParams", "WeightTable",
    "boundary_points", "build_row_index", "evolve", "extract_contour", "hausdorff",
    "load_weight_table", "make_grid", "perturb", "rasterize", "read_snapshot", "rhs", "rhs_at",
    "row_extent", "row_superlevel", "set_distance", "signed_distance", "stable_dt", "step",
    "weighted_measure", "write_snapshot",
]
