"""Zero-contour extraction and Hausdorff distances between fronts."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from skimage import measure

from .grid import ScalarField


@dataclass(frozen=True)
class Polyline:
    points: np.ndarray
    closed: bool

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("polyline needs at least 2 points in the plane")
        object.__setattr__(self, "points", pts)

    def sample_points(self) -> np.ndarray:
        """Vertices plus segment midpoints."""
        p = self.points
        q = np.vstack([p, p[:1]]) if self.closed else p
        return np.vstack([p, 0.5 * (q[1:] + q[:-1])])


def extract_contour(f: ScalarField, level: float = 0.0) -> list[Polyline]:
    """Marching-squares polylines of ``{u = level}`` in physical coordinates.

    Nodes sitting exactly on ``level`` are nudged up by ``1e-12 * osc`` first.
    """
    v = np.array(f.values)
    osc = f.oscillation
    if osc == 0:
        return []
    v[v == level] += 1e-12 * osc
    g = f.grid
    out = []
    for c in measure.find_contours(v, level):
        closed = len(c) > 2 and np.array_equal(c[0], c[-1])
        if closed:
            c = c[:-1]
        keep = np.ones(len(c), dtype=bool)
        keep[1:] = np.any(c[1:] != c[:-1], axis=1)
        c = c[keep]
        if len(c) < 2:
            continue
        pts = np.column_stack([g.origin[0] + c[:, 0] * g.h, g.origin[1] + c[:, 1] * g.h])
        out.append(Polyline(pts, closed))
    return out


def _points(a) -> np.ndarray:
    if isinstance(a, Polyline):
        return a.sample_points()
    parts = [p.sample_points() if isinstance(p, Polyline) else np.asarray(p, dtype=float)
             for p in a]
    if not parts:
        raise ValueError("empty point set")
    return np.vstack(parts)


def hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between polyline sets (or point arrays)."""
    pa, pb = _points(a), _points(b)
    if len(pa) == 0 or len(pb) == 0:
        raise ValueError("empty point set")
    dab = cKDTree(pb).query(pa)[0].max()
    dba = cKDTree(pa).query(pb)[0].max()
    return float(max(dab, dba))


def row_extent(f: ScalarField, j: int, level: float = 0.0) -> float:
    """Length of ``{u >= level}`` on row ``j`` between the outermost crossings,
    located by linear interpolation."""
    row = f.values[:, j] - level
    x = f.grid.x1
    inside = np.flatnonzero(row >= 0)
    if inside.size == 0:
        return 0.0
    lo, hi = inside[0], inside[-1]
    left = x[lo] if lo == 0 else x[lo - 1] + f.grid.h * (-row[lo - 1]) / (row[lo] - row[lo - 1])
    right = x[hi] if hi == len(x) - 1 else x[hi] + f.grid.h * row[hi] / (row[hi] - row[hi + 1])
    return float(right - left)


def write_contours(path, polylines: list[Polyline]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["polyline_id", "x1", "x2"])
        for k, p in enumerate(polylines):
            for x1, x2 in p.points:
                w.writerow([k, format(x1, ".17g"), format(x2, ".17g")])
