"""Initial level-set fields: exact signed distances, the arctan class-C map,
and seeded smooth perturbations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import CLAMP, GridSpec, ScalarField


@dataclass(frozen=True)
class Disk:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    @property
    def extent(self):
        return (self.radius, self.radius)


@dataclass(frozen=True)
class Rectangle:
    center: tuple[float, float]
    half_width_x1: float
    half_width_x2: float

    def __post_init__(self):
        if not (self.half_width_x1 > 0 and self.half_width_x2 > 0):
            raise ValueError("rectangle half-widths must be positive")

    @property
    def extent(self):
        return (self.half_width_x1, self.half_width_x2)


@dataclass(frozen=True)
class Annulus:
    center: tuple[float, float]
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not (0 < self.r_inner < self.r_outer):
            raise ValueError("annulus needs 0 < r_inner < r_outer")

    @property
    def extent(self):
        return (self.r_outer, self.r_outer)


Shape = Disk | Rectangle | Annulus


def signed_distance(shape: Shape, x1, x2):
    """Exact signed distance to the boundary; positive inside.

    Works on scalars or broadcastable arrays.
    """
    dx = np.asarray(x1, dtype=float) - shape.center[0]
    dy = np.asarray(x2, dtype=float) - shape.center[1]
    if isinstance(shape, Disk):
        return shape.radius - np.hypot(dx, dy)
    if isinstance(shape, Annulus):
        r = np.hypot(dx, dy)
        return np.minimum(r - shape.r_inner, shape.r_outer - r)
    if isinstance(shape, Rectangle):
        qx = np.abs(dx) - shape.half_width_x1
        qy = np.abs(dy) - shape.half_width_x2
        outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
        inside = np.minimum(np.maximum(qx, qy), 0.0)
        return -(outside + inside)
    raise TypeError(f"unsupported shape {shape!r}")


def to_class_c(d: ScalarField) -> ScalarField:
    """Map a signed-distance field into (-1, 1) by ``2 arctan(d) / pi``."""
    return ScalarField(d.grid, 2.0 * np.arctan(d.values) / np.pi, CLAMP)


def rasterize(shape: Shape, grid: GridSpec, class_c: bool = True) -> ScalarField:
    ex, ey = shape.extent
    c = shape.center
    margin = 2 * grid.h
    lo, hi = grid.origin, grid.upper
    if (c[0] - ex < lo[0] + margin or c[0] + ex > hi[0] - margin
            or c[1] - ey < lo[1] + margin or c[1] + ey > hi[1] - margin):
        raise ValueError(f"{shape!r} does not fit inside the grid with a 2h margin")
    X1, X2 = grid.mesh()
    d = ScalarField(grid, signed_distance(shape, X1, X2))
    return to_class_c(d) if class_c else d


def bump_field(grid: GridSpec, seed: int, modes: int) -> np.ndarray:
    """Low-frequency trigonometric field with unit sup-norm on the grid."""
    if modes < 1:
        raise ValueError("modes must be >= 1")
    rng = np.random.default_rng(seed)
    X1, X2 = grid.mesh()
    L1 = (grid.nx - 1) * grid.h
    L2 = (grid.ny - 1) * grid.h
    s = (X1 - grid.origin[0]) / L1
    r = (X2 - grid.origin[1]) / L2
    out = np.zeros(grid.shape)
    for k in range(1, modes + 1):
        for m in range(1, modes + 1):
            a, b = rng.normal(size=2) / (k * k + m * m)
            p1, p2 = rng.uniform(0, 2 * np.pi, size=2)
            out += (a * np.cos(2 * np.pi * k * s + p1) * np.cos(2 * np.pi * m * r + p2)
                    + b * np.sin(2 * np.pi * k * s + p2) * np.sin(2 * np.pi * m * r + p1))
    return out / np.abs(out).max()


def perturb(f: ScalarField, seed: int, amplitude: float, modes: int = 3) -> ScalarField:
    if amplitude < 0:
        raise ValueError("amplitude must be >= 0")
    if amplitude == 0:
        return f.with_values(f.values)
    return f.with_values(f.values + amplitude * bump_field(f.grid, seed, modes))


def boundary_points(shape: Shape, n: int = 2000) -> list[np.ndarray]:
    """Dense samples of the analytic boundary, one closed array per component."""
    c = np.asarray(shape.center, dtype=float)
    if isinstance(shape, (Disk, Annulus)):
        radii = [shape.radius] if isinstance(shape, Disk) else [shape.r_inner, shape.r_outer]
        th = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return [c + r * np.column_stack([np.cos(th), np.sin(th)]) for r in radii]
    a, b = shape.half_width_x1, shape.half_width_x2
    per_side = max(n // 4, 2)
    s = np.linspace(-1, 1, per_side, endpoint=False)
    sides = [np.column_stack([a * s, np.full_like(s, -b)]),
             np.column_stack([np.full_like(s, a), b * s]),
             np.column_stack([-a * s, np.full_like(s, b)]),
             np.column_stack([np.full_like(s, -a), -b * s])]
    return [c + np.vstack(sides)]
