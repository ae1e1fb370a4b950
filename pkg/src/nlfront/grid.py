"""Uniform 2-D grid, scalar fields on it, and the ghost-cell policy.

Index ``i`` runs along x1 (the axis carrying the nonlocal line integral),
index ``j`` along x2.  Field arrays are stored with shape ``(nx, ny)`` so that
``values[i, j]`` is the node at ``origin + (i*h, j*h)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CLAMP = "clamp_minus_one"
MIRROR = "mirror"
BOUNDARY_MODES = (CLAMP, MIRROR)


@dataclass(frozen=True)
class GridSpec:
    origin: tuple[float, float]
    h: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.h > 0 and np.isfinite(self.h)):
            raise ValueError(f"grid spacing must be positive, got h={self.h}")
        if self.nx < 3 or self.ny < 3:
            raise ValueError(f"grid dims must be >= 3, got {self.nx}x{self.ny}")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "h", float(self.h))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def coordinate(self, i, j):
        return (self.origin[0] + i * self.h, self.origin[1] + j * self.h)

    @property
    def x1(self) -> np.ndarray:
        return self.origin[0] + np.arange(self.nx) * self.h

    @property
    def x2(self) -> np.ndarray:
        return self.origin[1] + np.arange(self.ny) * self.h

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    @property
    def upper(self) -> tuple[float, float]:
        return self.coordinate(self.nx - 1, self.ny - 1)

    @property
    def area(self) -> float:
        """Area of the node hull."""
        return ((self.nx - 1) * self.h) * ((self.ny - 1) * self.h)

    def contains(self, point, margin: float = 0.0) -> bool:
        lo, hi = self.origin, self.upper
        return (lo[0] + margin <= point[0] <= hi[0] - margin
                and lo[1] + margin <= point[1] <= hi[1] - margin)


def make_grid(origin, h, nx, ny) -> GridSpec:
    return GridSpec(tuple(origin), h, int(nx), int(ny))


@dataclass(frozen=True)
class ScalarField:
    """Level-set field ``u(., t)`` on a grid.

    The array is copied and marked read-only on construction.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)
    boundary_mode: str = CLAMP

    def __post_init__(self):
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ValueError(f"unknown boundary mode {self.boundary_mode!r}")
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            bad = tuple(int(k) for k in np.argwhere(~np.isfinite(v))[0])
            raise ValueError(f"non-finite value at node {bad}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.grid, values, self.boundary_mode)

    @property
    def oscillation(self) -> float:
        return float(self.values.max() - self.values.min())

    def padded(self, width: int = 1) -> np.ndarray:
        """Values surrounded by ``width`` ghost layers."""
        if self.boundary_mode == CLAMP:
            return np.pad(self.values, width, mode="constant", constant_values=-1.0)
        return np.pad(self.values, width, mode="edge")


def read_ghost(f: ScalarField, i: int, j: int) -> float:
    nx, ny = f.grid.shape
    if 0 <= i < nx and 0 <= j < ny:
        return float(f.values[i, j])
    if f.boundary_mode == CLAMP:
        return -1.0
    return float(f.values[min(max(i, 0), nx - 1), min(max(j, 0), ny - 1)])


def sample_bilinear(f: ScalarField, point) -> float:
    g = f.grid
    s = (point[0] - g.origin[0]) / g.h
    r = (point[1] - g.origin[1]) / g.h
    # tolerate rounding at the far edge
    eps = 1e-9
    if not (-eps <= s <= g.nx - 1 + eps and -eps <= r <= g.ny - 1 + eps):
        raise ValueError(f"point {tuple(point)} outside grid hull")
    i0 = min(max(int(np.floor(s)), 0), g.nx - 2)
    j0 = min(max(int(np.floor(r)), 0), g.ny - 2)
    a, b = s - i0, r - j0
    v = f.values
    return float((1 - a) * (1 - b) * v[i0, j0] + a * (1 - b) * v[i0 + 1, j0]
                 + (1 - a) * b * v[i0, j0 + 1] + a * b * v[i0 + 1, j0 + 1])


def write_snapshot(path, f: ScalarField, t: float) -> None:
    g = f.grid
    lines = [f"# grid origin={g.origin[0]!r},{g.origin[1]!r} h={g.h!r} dims={g.nx}x{g.ny}",
             f"# t={float(t)!r}"]
    for j in range(g.ny):
        lines.append(",".join(format(v, ".17g") for v in f.values[:, j]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot(path, boundary_mode: str = CLAMP) -> tuple[ScalarField, float]:
    text = Path(path).read_text().splitlines()
    head, tline = text[0], text[1]
    parts = dict(tok.split("=", 1) for tok in head[1:].split()[1:])
    ox, oy = (float(s) for s in parts["origin"].split(","))
    nx, ny = (int(s) for s in parts["dims"].split("x"))
    grid = make_grid((ox, oy), float(parts["h"]), nx, ny)
    t = float(tline.split("=", 1)[1])
    rows = np.array([[float(s) for s in line.split(",")] for line in text[2:2 + ny]])
    return ScalarField(grid, rows.T, boundary_mode), t
