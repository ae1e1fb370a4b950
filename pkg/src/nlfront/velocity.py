"""Spatial operators and assembled right-hand sides.

Three models are supported:

``tomographic``
    ``C(x,t) * m(x) * |d1 u| + kappa * curv(u)`` where ``m`` is the weighted
    measure of the row superlevel set through ``x``.
``general_k1``
    same nonlocal factor paired with the full gradient norm.
``volume_power``
    ``sqrt(area{u >= u(x)}) * |Du|`` (plus ``kappa * curv`` if requested).

First-derivative magnitudes use the monotone one-sided stencil for
expanding fronts; the curvature term uses central differences regularized
by ``delta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import ScalarField, read_ghost
from .kernels import euler_step, row_self_measure
from .linesets import RowMeasureIndex, WeightTable

MODELS = ("tomographic", "volume_power", "general_k1")


@dataclass(frozen=True)
class VelocityParams:
    """Model selector and coefficients.

    ``amplitude`` is a constant, an ``(nx, ny)`` array, or a callable
    ``C(x1, x2, t)`` evaluated on the mesh.  A zero amplitude switches the
    nonlocal part off and leaves pure curvature flow.
    """

    model: str = "tomographic"
    amplitude: float | np.ndarray | Callable = 1.0
    weight: WeightTable = field(default_factory=WeightTable.const)
    curvature_coef: float = 0.0
    grad_reg_delta: float | None = None
    volume_exponent: float = 0.5

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.curvature_coef < 0:
            raise ValueError("curvature_coef must be >= 0")
        if self.grad_reg_delta is not None and not self.grad_reg_delta > 0:
            raise ValueError("grad_reg_delta must be > 0")
        if not callable(self.amplitude) and np.any(np.asarray(self.amplitude) < 0):
            raise ValueError("amplitude must be nonnegative")

    def amplitude_on(self, f: ScalarField, t: float = 0.0):
        a = self.amplitude
        if callable(a):
            X1, X2 = f.grid.mesh()
            out = np.broadcast_to(np.asarray(a(X1, X2, t), dtype=float), f.grid.shape)
            if np.any(out < 0):
                raise ValueError(f"amplitude negative at t={t}")
            return out
        return a if np.isscalar(a) else np.asarray(a, dtype=float)

    def amplitude_at(self, f: ScalarField, i: int, j: int, t: float = 0.0) -> float:
        a = self.amplitude
        if callable(a):
            x1, x2 = f.grid.coordinate(i, j)
            return float(a(np.float64(x1), np.float64(x2), t))
        return float(a) if np.isscalar(a) else float(np.asarray(a)[i, j])

    def delta_for(self, f: ScalarField) -> float:
        if self.grad_reg_delta is not None:
            return self.grad_reg_delta
        osc = f.oscillation
        return 1e-6 * osc if osc > 0 else 1e-6

    @property
    def nonlocal_off(self) -> bool:
        a = self.amplitude
        return not callable(a) and np.all(np.asarray(a) == 0)


@dataclass(frozen=True)
class StencilSample:
    d1m: float
    d1p: float
    d2m: float
    d2p: float
    p1: float
    p2: float
    u11: float
    u22: float
    u12: float


def stencil(f: ScalarField, i: int, j: int) -> StencilSample:
    h = f.grid.h
    c = read_ghost(f, i, j)
    e, w = read_ghost(f, i + 1, j), read_ghost(f, i - 1, j)
    n, s = read_ghost(f, i, j + 1), read_ghost(f, i, j - 1)
    d1m, d1p = (c - w) / h, (e - c) / h
    d2m, d2p = (c - s) / h, (n - c) / h
    u12 = (read_ghost(f, i + 1, j + 1) - read_ghost(f, i + 1, j - 1)
           - read_ghost(f, i - 1, j + 1) + read_ghost(f, i - 1, j - 1)) / (4 * h * h)
    return StencilSample(d1m, d1p, d2m, d2p,
                         0.5 * (d1m + d1p), 0.5 * (d2m + d2p),
                         (d1p - d1m) / h, (d2p - d2m) / h, u12)


def upwind_grad1(s: StencilSample, speed: float = 1.0) -> float:
    """Monotone ``|d1 u|`` for ``u_t = c |d1 u|`` with ``c >= 0``."""
    if speed < 0:
        raise ValueError("speed must be nonnegative")
    return float(np.hypot(min(s.d1m, 0.0), max(s.d1p, 0.0)))


def upwind_grad(s: StencilSample) -> float:
    return float(np.sqrt(min(s.d1m, 0.0) ** 2 + max(s.d1p, 0.0) ** 2
                         + min(s.d2m, 0.0) ** 2 + max(s.d2p, 0.0) ** 2))


def curvature_term(s: StencilSample, delta: float) -> float:
    """Regularized ``Trace[(I - p p^T/|p|^2) D2u]``."""
    if not delta > 0:
        raise ValueError("delta must be > 0")
    d2 = delta * delta
    q1, q2 = s.p1 * s.p1, s.p2 * s.p2
    return (s.u11 * (q2 + 0.5 * d2) + s.u22 * (q1 + 0.5 * d2)
            - 2.0 * s.u12 * s.p1 * s.p2) / (q1 + q2 + d2)


def tomo_rhs_at(f: ScalarField, index: RowMeasureIndex, i: int, j: int,
                params: VelocityParams, t: float = 0.0, theta: float | None = None) -> float:
    """Tomographic right-hand side at one node.

    ``theta`` overrides the threshold of the row set (default ``u[i, j]``),
    which is how the set argument is varied with everything else frozen.
    """
    s = stencil(f, i, j)
    out = 0.0
    if not params.nonlocal_off:
        th = f.values[i, j] if theta is None else theta
        c = params.amplitude_at(f, i, j, t)
        m = index.query(j, th, weak=True)
        grad = upwind_grad1(s, c * m) if params.model == "tomographic" else upwind_grad(s)
        out = c * m * grad
    if params.curvature_coef:
        out += params.curvature_coef * curvature_term(s, params.delta_for(f))
    return out


def general_rhs_at(f, index, i, j, params, t=0.0, theta=None) -> float:
    return tomo_rhs_at(f, index, i, j, params, t, theta)


def superlevel_area(f: ScalarField, theta: float) -> float:
    return float(np.count_nonzero(f.values >= theta)) * f.grid.h ** 2


def volume_rhs_at(f: ScalarField, i: int, j: int, params: VelocityParams,
                  theta: float | None = None) -> float:
    s = stencil(f, i, j)
    th = f.values[i, j] if theta is None else theta
    out = superlevel_area(f, th) ** params.volume_exponent * upwind_grad(s)
    if params.curvature_coef:
        out += params.curvature_coef * curvature_term(s, params.delta_for(f))
    return out


def rhs_at(f, index, i, j, params, t=0.0, theta=None) -> float:
    if params.model == "volume_power":
        return volume_rhs_at(f, i, j, params, theta)
    return tomo_rhs_at(f, index, i, j, params, t, theta)


# --- whole-grid evaluation -------------------------------------------------

def differences(f: ScalarField) -> dict[str, np.ndarray]:
    """One-sided, central and second differences at every node."""
    h = f.grid.h
    P = f.padded(1)
    c = P[1:-1, 1:-1]
    d1m = (c - P[:-2, 1:-1]) / h
    d1p = (P[2:, 1:-1] - c) / h
    d2m = (c - P[1:-1, :-2]) / h
    d2p = (P[1:-1, 2:] - c) / h
    return dict(
        d1m=d1m, d1p=d1p, d2m=d2m, d2p=d2p,
        p1=0.5 * (d1m + d1p), p2=0.5 * (d2m + d2p),
        u11=(d1p - d1m) / h, u22=(d2p - d2m) / h,
        u12=(P[2:, 2:] - P[2:, :-2] - P[:-2, 2:] + P[:-2, :-2]) / (4 * h * h),
    )


def upwind_grad1_field(d) -> np.ndarray:
    return np.hypot(np.minimum(d["d1m"], 0.0), np.maximum(d["d1p"], 0.0))


def upwind_grad_field(d) -> np.ndarray:
    return np.sqrt(np.minimum(d["d1m"], 0.0) ** 2 + np.maximum(d["d1p"], 0.0) ** 2
                   + np.minimum(d["d2m"], 0.0) ** 2 + np.maximum(d["d2p"], 0.0) ** 2)


def curvature_field(d, delta: float) -> np.ndarray:
    d2 = delta * delta
    q1, q2 = d["p1"] ** 2, d["p2"] ** 2
    return (d["u11"] * (q2 + 0.5 * d2) + d["u22"] * (q1 + 0.5 * d2)
            - 2.0 * d["u12"] * d["p1"] * d["p2"]) / (q1 + q2 + d2)


def volume_factor_field(f: ScalarField, exponent: float = 0.5) -> np.ndarray:
    flat = np.sort(f.values, axis=None)
    count = flat.size - np.searchsorted(flat, f.values, side="left")
    return (count * f.grid.h ** 2) ** exponent


def speed_field(f: ScalarField, params: VelocityParams, t: float = 0.0,
                index: RowMeasureIndex | None = None) -> tuple[np.ndarray, int]:
    """First-order coefficient at every node and the gradient pairing
    (0 none, 1 x1 upwind, 2 full upwind)."""
    if params.model == "volume_power":
        return volume_factor_field(f, params.volume_exponent), 2
    if params.nonlocal_off:
        return _NO_SPEED, 0
    if index is not None:
        m = index.self_measure()
    else:
        ut = np.ascontiguousarray(f.values.T)
        m = row_self_measure(ut, np.argsort(ut, axis=1),
                             params.weight.cell_weights(f.grid)).T
    speed = np.asarray(params.amplitude_on(f, t) * m, dtype=float)
    return np.ascontiguousarray(np.broadcast_to(speed, f.grid.shape)), (
        1 if params.model == "tomographic" else 2)


_NO_SPEED = np.zeros((1, 1))


def rhs(f: ScalarField, params: VelocityParams, t: float = 0.0,
        index: RowMeasureIndex | None = None) -> np.ndarray:
    """Right-hand side at every node (compiled kernel)."""
    return explicit_update(f, params, 0.0, t, index)[0]


def explicit_update(f: ScalarField, params: VelocityParams, dt: float, t: float = 0.0,
                    index: RowMeasureIndex | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``(rhs, u_new)`` for one forward-Euler step of size ``dt``.

    ``u_new`` is clipped node-wise to the range of the old 3x3 neighbourhood
    (ghosts included), so the update never creates new extrema.
    """
    speed, mode = speed_field(f, params, t, index)
    return euler_step(f.padded(1), speed, f.grid.h, float(params.curvature_coef),
                      float(params.delta_for(f)), mode, float(dt))


def rhs_reference(f: ScalarField, params: VelocityParams, t: float = 0.0,
                  index: RowMeasureIndex | None = None) -> np.ndarray:
    """Plain numpy evaluation of the same right-hand side."""
    d = differences(f)
    out = np.zeros(f.grid.shape)
    if params.model == "volume_power":
        out += volume_factor_field(f, params.volume_exponent) * upwind_grad_field(d)
    elif not params.nonlocal_off:
        if index is None:
            index = RowMeasureIndex(f, params.weight)
        speed = params.amplitude_on(f, t) * index.self_measure()
        grad = upwind_grad1_field(d) if params.model == "tomographic" else upwind_grad_field(d)
        out += speed * grad
    if params.curvature_coef:
        out += params.curvature_coef * curvature_field(d, params.delta_for(f))
    return out


def check_h3_monotone(params: VelocityParams, f: ScalarField, samples: int = 1000,
                      seed: int = 0) -> dict:
    """Lower the set threshold at random nodes and record any decrease of the rhs."""
    rng = np.random.default_rng(seed)
    index = RowMeasureIndex(f, params.weight) if params.model != "volume_power" else None
    nx, ny = f.grid.shape
    osc = f.oscillation or 1.0
    worst = 0.0
    violations = 0
    for _ in range(samples):
        i, j = int(rng.integers(nx)), int(rng.integers(ny))
        th = f.values[i, j]
        lower = th - rng.uniform(0, osc)
        base = rhs_at(f, index, i, j, params, 0.0, th)
        enlarged = rhs_at(f, index, i, j, params, 0.0, lower)
        gap = base - enlarged
        if gap > 0:
            violations += 1
            worst = max(worst, gap)
    return {"samples": samples, "violations": violations, "max_violation": worst}
