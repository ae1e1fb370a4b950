"""Forward-Euler time stepping with CFL control and steady-state detection."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .grid import ScalarField
from .linesets import RowMeasureIndex
from .velocity import VelocityParams, explicit_update

REACHED_T = "reached_T"
STEADY = "steady_state"
INSTABILITY = "instability"


class InstabilityError(RuntimeError):
    def __init__(self, message, node=None, trajectory=None):
        super().__init__(message)
        self.node = node
        self.trajectory = trajectory


@dataclass
class StepReport:
    t: float
    dt: float
    max_rhs: float
    residual: float
    area_zero_superlevel: float
    wall_time: float = 0.0

    def record(self) -> dict:
        return {"t": self.t, "dt": self.dt, "residual": self.residual,
                "max_rhs": self.max_rhs, "area_zero_superlevel": self.area_zero_superlevel}


@dataclass
class Trajectory:
    snapshots: list[tuple[float, ScalarField]] = field(default_factory=list)
    metrics: list[StepReport] = field(default_factory=list)
    reason: str | None = None

    @property
    def final(self) -> ScalarField:
        return self.snapshots[-1][1]

    @property
    def times(self) -> list[float]:
        return [t for t, _ in self.snapshots]

    def write_metrics(self, path) -> None:
        with open(path, "w") as fh:
            for m in self.metrics:
                fh.write(json.dumps(m.record()) + "\n")


def max_speed_bound(f: ScalarField, params: VelocityParams, t: float = 0.0) -> float:
    """Upper bound on the first-order speed coefficient over the grid."""
    if params.model == "volume_power":
        return (f.grid.nx * f.grid.ny * f.grid.h ** 2) ** params.volume_exponent
    if params.nonlocal_off:
        return 0.0
    amp = np.max(params.amplitude_on(f, t))
    row = float(np.sum(params.weight.cell_weights(f.grid)))
    return float(amp) * row


def stable_dt(f: ScalarField, params: VelocityParams, cfl_safety: float = 0.5,
              T: float | None = None, t: float = 0.0, dt_max: float | None = None) -> float:
    if not 0 < cfl_safety <= 1:
        raise ValueError("cfl_safety must lie in (0, 1]")
    h = f.grid.h
    rate = max_speed_bound(f, params, t) / h + 4 * params.curvature_coef / h ** 2
    if dt_max is None:
        dt_max = T / 100 if T is not None else np.inf
    if rate == 0:
        if not np.isfinite(dt_max):
            raise ValueError("zero velocity needs a finite dt cap (pass T or dt_max)")
        return float(dt_max)
    return float(min(cfl_safety / rate, dt_max))


def step(f: ScalarField, params: VelocityParams, dt: float, t: float = 0.0,
         index: RowMeasureIndex | None = None) -> tuple[ScalarField, StepReport]:
    t0 = time.perf_counter()
    r, new = explicit_update(f, params, dt, t, index)
    bad = ~(np.isfinite(new) & np.isfinite(r))
    if bad.any():
        node = tuple(int(k) for k in np.argwhere(bad)[0])
        raise InstabilityError(f"non-finite value at node {node} (t={t + dt})", node=node)
    out = f.with_values(new)
    change = float(np.max(np.abs(new - f.values))) / dt
    rep = StepReport(t + dt, dt, float(np.max(np.abs(r))), change,
                     float(np.count_nonzero(new >= 0)) * f.grid.h ** 2,
                     time.perf_counter() - t0)
    return out, rep


@dataclass
class EvolveOptions:
    cfl_safety: float = 0.5
    snapshot_stride: int = 1
    snapshot_times: tuple[float, ...] = ()
    steady_tol: float | None = None
    steady_steps: int = 10
    dt: float | None = None


def evolve(f0: ScalarField, params: VelocityParams, T: float,
           options: EvolveOptions | None = None, **kw) -> Trajectory:
    """Integrate to ``T``.

    Snapshots are taken every ``snapshot_stride`` steps and, in addition,
    exactly at each of ``snapshot_times`` (the step is shortened to land on
    them).  The initial and final states are always stored.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    opts = options or EvolveOptions(**kw)
    tol = opts.steady_tol
    if tol is None:
        tol = 1e-4 * f0.oscillation / T
    marks = sorted(s for s in opts.snapshot_times if 0 < s < T)
    traj = Trajectory(snapshots=[(0.0, f0)])
    f, t, n, calm = f0, 0.0, 0, 0
    while True:
        dt = opts.dt or stable_dt(f, params, opts.cfl_safety, T=T, t=t)
        target = marks[0] if marks else T
        landing = t + dt >= target * (1 - 1e-12)
        if landing:
            dt = target - t
        try:
            f, rep = step(f, params, dt, t)
        except InstabilityError as e:
            traj.reason = INSTABILITY
            e.trajectory = traj
            raise
        t = target if landing else t + dt
        rep.t = t
        n += 1
        traj.metrics.append(rep)
        if landing and marks:
            marks.pop(0)
            traj.snapshots.append((t, f))
        elif opts.snapshot_stride and n % opts.snapshot_stride == 0 and not landing:
            traj.snapshots.append((t, f))
        calm = calm + 1 if rep.residual < tol else 0
        if landing and not marks and t >= T:
            traj.reason = REACHED_T
            break
        if calm >= opts.steady_steps:
            traj.reason = STEADY
            break
    if traj.snapshots[-1][0] != t:
        traj.snapshots.append((t, f))
    return traj
