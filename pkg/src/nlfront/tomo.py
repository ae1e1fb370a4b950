"""Single-view reconstruction demo for radially symmetric binary objects.

A noisy initial contour is pushed outward by the tomographic velocity until
it stalls at the object edge.  The stall comes from an edge-stopping
amplitude ``C(x)`` built from the binary image: large inside the object,
a tiny positive floor outside.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from .contour import extract_contour, hausdorff
from .evolve import EvolveOptions, Trajectory, evolve
from .front_init import Annulus, Disk, Shape, boundary_points, perturb, rasterize, signed_distance
from .grid import GridSpec, ScalarField
from .linesets import WeightTable, load_weight_table
from .velocity import VelocityParams


@dataclass(frozen=True)
class Phantom:
    shape: Shape
    grid: GridSpec
    mask: np.ndarray
    field: ScalarField

    @property
    def area(self) -> float:
        return float(self.mask.sum()) * self.grid.h ** 2


def make_phantom(shape: Shape, grid: GridSpec) -> Phantom:
    """Binary mask (node strictly inside) plus its class-C level-set field."""
    if not isinstance(shape, (Disk, Annulus)):
        raise ValueError(f"phantom must be radially symmetric (disk or annulus), got {type(shape).__name__}")
    X1, X2 = grid.mesh()
    mask = signed_distance(shape, X1, X2) > 0
    mask.setflags(write=False)
    return Phantom(shape, grid, mask, rasterize(shape, grid))


def load_projection_weight(path) -> tuple[WeightTable, float]:
    """Weight table from a ``z,g`` CSV and its trapezoid mass.

    Raises the specific ``WeightFileError`` subclasses on bad input, and
    ``ValueError`` if the mass is not finite.
    """
    table = load_weight_table(path)
    mass = table.mass()
    if not np.isfinite(mass):
        raise ValueError(f"{path}: weight mass is not finite")
    return table, mass


def edge_stopping_amplitude(phantom: Phantom, c_in: float = 5.0, c_floor: float = 1e-7,
                            width: int = 3) -> np.ndarray:
    """Amplitude field from the binary image.

    ``c_in`` deep inside, ramping down over ``width`` cells at the edge, and
    ``c_floor`` outside so the coefficient stays positive.
    """
    m = phantom.mask.astype(float)
    s = np.where(phantom.mask, uniform_filter(m, width, mode="constant"), 0.0)
    return c_floor + (c_in - c_floor) * s


def demo_params(phantom: Phantom, weight: WeightTable | None = None, **kw) -> VelocityParams:
    return VelocityParams(model="tomographic", amplitude=edge_stopping_amplitude(phantom, **kw),
                          weight=weight or WeightTable.const())


@dataclass
class Reconstruction:
    trajectory: Trajectory
    distances: list[tuple[float, float]]

    @property
    def reason(self) -> str:
        return self.trajectory.reason

    @property
    def initial_distance(self) -> float:
        return self.distances[0][1]

    @property
    def final_distance(self) -> float:
        return self.distances[-1][1]

    def write_distances(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "hausdorff"])
            for t, d in self.distances:
                w.writerow([format(t, ".17g"), format(d, ".17g")])


def noisy_start(phantom: Phantom, noise_seed: int, noise_amp: float, modes: int = 3) -> ScalarField:
    """Phantom field plus a seeded bump, shifted down by ``noise_amp`` so the
    noisy front lies inside the object (an expanding flow can only correct
    from the inside)."""
    f = perturb(phantom.field, noise_seed, noise_amp, modes)
    return f.with_values(f.values - noise_amp)


def reconstruct(phantom: Phantom, noise_seed: int, noise_amp: float, params: VelocityParams,
                T: float, options: EvolveOptions | None = None, **kw) -> Reconstruction:
    if params.model != "tomographic":
        raise ValueError("reconstruct needs the tomographic model")
    u0 = noisy_start(phantom, noise_seed, noise_amp)
    traj = evolve(u0, params, T, options, **kw)
    truth = boundary_points(phantom.shape)
    dist = []
    for t, f in traj.snapshots:
        lines = extract_contour(f)
        dist.append((t, hausdorff(lines, truth) if lines else float("inf")))
    return Reconstruction(traj, dist)
