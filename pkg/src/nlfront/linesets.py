"""Superlevel sets restricted to a grid row, their weighted measures, the
sorted per-row index used by the solver, and the set metric on the line.

The nonlocal line through node ``(i, j)`` is row ``j`` (x2 fixed) and the
weight ``g`` is a function of x1.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, ScalarField


class WeightFileError(ValueError):
    pass


class EmptyWeightFile(WeightFileError):
    pass


class NonMonotoneWeightFile(WeightFileError):
    pass


class NonPositiveWeight(WeightFileError):
    pass


@dataclass(frozen=True)
class WeightTable:
    """Positive weight ``g(z)``: piecewise linear through ``(z, g)`` samples
    and zero outside their range, or a single constant."""

    z: np.ndarray | None = None
    g: np.ndarray | None = None
    constant: float | None = None

    def __post_init__(self):
        if self.constant is not None:
            if not self.constant > 0:
                raise ValueError("constant weight must be positive")
            return
        z = np.asarray(self.z, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if z.size == 0 or z.shape != g.shape:
            raise ValueError("weight table must be nonempty with matching z, g")
        if np.any(np.diff(z) <= 0):
            raise ValueError("weight table z must be strictly increasing")
        if np.any(g <= 0):
            raise ValueError("weight table g must be positive")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "g", g)

    @classmethod
    def const(cls, value: float = 1.0) -> "WeightTable":
        return cls(constant=float(value))

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.constant is not None:
            return np.full(z.shape, self.constant)
        return np.interp(z, self.z, self.g, left=0.0, right=0.0)

    @property
    def max(self) -> float:
        return self.constant if self.constant is not None else float(self.g.max())

    def mass(self) -> float:
        """Trapezoid integral over the sample range (inf for a constant)."""
        if self.constant is not None:
            return float("inf")
        return float(np.trapezoid(self.g, self.z))

    def cell_weights(self, grid: GridSpec) -> np.ndarray:
        """``g(x1(i)) * h`` for every column index ``i``."""
        return self(grid.x1) * grid.h


def load_weight_table(path) -> WeightTable:
    """Read a two-column ``z,g`` CSV (an optional ``z,g`` header is skipped)."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or not "".join(rec).strip() or rec[0].lstrip().startswith("#"):
                continue
            if len(rec) != 2:
                raise WeightFileError(f"{path}:{lineno}: expected 2 columns, got {len(rec)}")
            try:
                z, g = float(rec[0]), float(rec[1])
            except ValueError:
                if not rows and rec[0].strip().lower() == "z":
                    continue
                raise WeightFileError(f"{path}:{lineno}: not a number: {rec!r}") from None
            rows.append((lineno, z, g))
    if not rows:
        raise EmptyWeightFile(f"{path}: no weight samples")
    for (_, z0, _), (lineno, z1, _) in zip(rows, rows[1:]):
        if z1 <= z0:
            raise NonMonotoneWeightFile(f"{path}:{lineno}: z={z1} not greater than previous z={z0}")
    for lineno, z, g in rows:
        if g <= 0:
            raise NonPositiveWeight(f"{path}:{lineno}: g={g} must be positive")
    arr = np.array([(z, g) for _, z, g in rows])
    return WeightTable(arr[:, 0], arr[:, 1])


def save_weight_table(path, table: WeightTable) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z", "g"])
        for z, g in zip(table.z, table.g):
            w.writerow([repr(float(z)), repr(float(g))])


@dataclass(frozen=True)
class LevelLineSet:
    row: int
    threshold: float
    strict: bool
    cells: np.ndarray

    def __len__(self):
        return len(self.cells)


def row_superlevel(f: ScalarField, i: int, j: int, strict: bool = False) -> LevelLineSet:
    row = f.values[:, j]
    theta = float(row[i])
    mask = row > theta if strict else row >= theta
    return LevelLineSet(j, theta, strict, np.flatnonzero(mask))


def row_superlevel_at(f: ScalarField, j: int, theta: float, strict: bool = False) -> LevelLineSet:
    row = f.values[:, j]
    mask = row > theta if strict else row >= theta
    return LevelLineSet(j, float(theta), strict, np.flatnonzero(mask))


def weighted_measure(s: LevelLineSet, g: WeightTable, grid: GridSpec) -> float:
    if len(s.cells) == 0:
        return 0.0
    return float(np.sum(g(grid.x1[s.cells])) * grid.h)


class RowMeasureIndex:
    """Rows sorted ascending with suffix sums of ``g(x1) h``.

    ``query(j, theta)`` returns the weighted measure of
    ``{i : u[i, j] >= theta}`` (``>`` when ``weak=False``) in O(log nx).
    Arrays are stored row-major, shape ``(ny, nx)``.
    """

    def __init__(self, f: ScalarField, g: WeightTable):
        ut = np.ascontiguousarray(f.values.T)
        ny, nx = ut.shape
        self.grid = f.grid
        self.order = np.argsort(ut, axis=1)
        self.sorted = np.take_along_axis(ut, self.order, axis=1)
        w = g.cell_weights(f.grid)[self.order]
        # suffix[j, k] = sum of weights at sorted positions >= k; suffix[j, nx] = 0
        self.suffix = np.zeros((ny, nx + 1))
        self.suffix[:, :nx] = np.cumsum(w[:, ::-1], axis=1)[:, ::-1]

    def query(self, j: int, theta: float, weak: bool = True) -> float:
        k = np.searchsorted(self.sorted[j], theta, side="left" if weak else "right")
        return float(self.suffix[j, k])

    def query_many(self, j: int, thetas, weak: bool = True) -> np.ndarray:
        k = np.searchsorted(self.sorted[j], thetas, side="left" if weak else "right")
        return self.suffix[j, k]

    def full_row(self) -> np.ndarray:
        return self.suffix[:, 0].copy()

    def self_measure(self) -> np.ndarray:
        """Weak-set measure at every node's own value, shape ``(nx, ny)``."""
        s = self.sorted
        nx = s.shape[1]
        start = np.ones(s.shape, dtype=bool)
        start[:, 1:] = s[:, 1:] != s[:, :-1]
        # first sorted position of each run of equal values
        first = np.maximum.accumulate(np.where(start, np.arange(nx), 0), axis=1)
        m_sorted = np.take_along_axis(self.suffix, first, axis=1)
        out = np.empty_like(m_sorted)
        np.put_along_axis(out, self.order, m_sorted, axis=1)
        return out.T


def build_row_index(f: ScalarField, g: WeightTable) -> RowMeasureIndex:
    return RowMeasureIndex(f, g)


def naive_row_measure(f: ScalarField, g: WeightTable, j: int, theta: float,
                      weak: bool = True) -> float:
    row = f.values[:, j]
    mask = row >= theta if weak else row > theta
    return float(np.sum(g.cell_weights(f.grid)[mask]))


def line_centers(n: int, h: float) -> np.ndarray:
    """Cell centers of a 1-D grid of ``n`` cells centered at 0."""
    return (np.arange(n) - (n - 1) / 2.0) * h


def set_distance(a, b, h: float, n_max: int = 40, centers=None) -> float:
    """Truncated series metric between two cell sets on the line.

    ``a`` and ``b`` are boolean indicator arrays on a common grid of spacing
    ``h`` (cell centers from ``line_centers`` unless given).  The n = 0 term
    is taken as 0.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError("sets must live on the same grid")
    if centers is None:
        centers = line_centers(a.size, h)
    dist = np.abs(centers[a ^ b])
    total = 0.0
    for n in range(1, n_max + 1):
        measure = np.count_nonzero(dist < n) * h
        total += measure / (2.0 ** n * 2 * n)
    return total


@dataclass
class LimsupReport:
    violations: list[int]
    ties: list[int]
    tie_violations: list[int]
    checked: int

    @property
    def ok(self) -> bool:
        return not self.violations


def limsup_inclusion_check(fields, points, limit_field: ScalarField, limit_point,
                           z_samples, strict: bool = False, tol: float = 1e-6,
                           tail_fraction: float = 0.5) -> LimsupReport:
    """Sampled check that limsup of the row-set indicators along a converging
    sequence is dominated by the limit indicator.

    The row of each set is the ``j`` of the corresponding point.  The limsup
    is estimated as the max over the last ``tail_fraction`` of the sequence.
    Samples where ``u(z) == u(x)`` exactly are reported as ties and kept out
    of ``violations``.
    """
    fields = list(fields)
    points = list(points)
    z_samples = list(z_samples)
    if len(fields) < 3:
        raise ValueError("need a sequence of at least 3 fields")
    if len(points) != len(fields):
        raise ValueError("one point per field required")
    li, lj = limit_point
    ux = limit_field.values[li, lj]
    last_i, last_j = points[-1]
    if abs(fields[-1].values[last_i, last_j] - ux) > tol:
        raise ValueError("u_n(x_n) does not converge to u(x) within tolerance")
    start = min(int(len(fields) * (1 - tail_fraction)), len(fields) - 1)
    tail = list(zip(fields[start:], points[start:]))

    def indicator(u, j, z, theta):
        return u[z, j] > theta if strict else u[z, j] >= theta

    violations, ties, tie_viol = [], [], []
    for z in z_samples:
        lim = indicator(limit_field.values, lj, z, ux)
        sup = max(indicator(fn.values, pj, z, fn.values[pi, pj]) for fn, (pi, pj) in tail)
        tie = limit_field.values[z, lj] == ux
        if tie:
            ties.append(int(z))
        if sup and not lim:
            (tie_viol if tie else violations).append(int(z))
    return LimsupReport(violations, ties, tie_viol, len(z_samples))
