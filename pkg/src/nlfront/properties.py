"""Numerical checks of the structural theory: discrete comparison, invariance
of the zero set under relabeling, the explicit subsolution residual, the
p = 0 envelope audit and the limsup inclusion of row sets along converging
sequences.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .contour import extract_contour, hausdorff
from .evolve import evolve, stable_dt, step
from .front_init import Disk, bump_field, perturb, rasterize
from .grid import GridSpec, ScalarField
from .linesets import LimsupReport, limsup_inclusion_check
from .velocity import StencilSample, VelocityParams, curvature_term


# --- comparison ------------------------------------------------------------

@dataclass
class ComparisonReport:
    sup_violation: float
    first_violation_time: float | None
    steps: int
    tol: float

    @property
    def ok(self) -> bool:
        return self.sup_violation <= self.tol


def check_comparison(u0: ScalarField, v0: ScalarField, params: VelocityParams, T: float,
                     cfl_safety: float = 0.5, tol: float = 1e-10) -> ComparisonReport:
    """Evolve ``u0 <= v0`` side by side with one dt schedule and track
    ``max (u - v)+`` over all steps."""
    if u0.grid != v0.grid:
        raise ValueError("fields must share a grid")
    gap = u0.values - v0.values
    if np.any(gap > 0):
        i, j = np.unravel_index(np.argmax(gap), gap.shape)
        raise ValueError(f"u0 <= v0 violated at node ({i}, {j}) by {gap[i, j]:.3g}")
    u, v, t, n = u0, v0, 0.0, 0
    worst, first = 0.0, None
    while t < T * (1 - 1e-12):
        dt = min(stable_dt(u, params, cfl_safety, T=T, t=t),
                 stable_dt(v, params, cfl_safety, T=T, t=t), T - t)
        u, _ = step(u, params, dt, t)
        v, _ = step(v, params, dt, t)
        t += dt
        n += 1
        d = float(np.max(u.values - v.values))
        if d > 0:
            worst = max(worst, d)
            if first is None and d > tol:
                first = t
    return ComparisonReport(worst, first, n, tol)


def random_ordered_pair(grid: GridSpec, seed: int, kind: str = "nested",
                        noise: float = 0.05) -> tuple[ScalarField, ScalarField]:
    """Seeded class-C pair with ``u <= v``.

    ``nested``: two perturbed disks, the larger one maxed with the smaller.
    ``offset``: ``v = min(u + s, 1)`` for a smooth nonnegative shift ``s``.
    """
    rng = np.random.default_rng(seed)
    c = tuple(rng.uniform(-0.3, 0.3, 2))
    r = rng.uniform(0.3, 0.7)
    u = perturb(rasterize(Disk(c, r), grid), seed, noise)
    if kind == "nested":
        v = perturb(rasterize(Disk(c, r + rng.uniform(0.02, 0.3)), grid), seed, noise)
        return u, v.with_values(np.maximum(v.values, u.values))
    if kind == "offset":
        s = 0.5 * (1 + bump_field(grid, seed + 1000, 3)) * rng.uniform(0.0, 0.1)
        return u, u.with_values(np.minimum(u.values + s, 1.0))
    raise ValueError(f"unknown pair kind {kind!r}")


# --- relabeling --------------------------------------------------------------

def check_relabel(u0: ScalarField, relabel: Callable, params: VelocityParams, T: float,
                  times, cfl_safety: float = 0.5, samples: int = 1001,
                  keep: list | None = None) -> list[float]:
    """Zero-contour Hausdorff distance between the evolutions of ``u0`` and
    ``relabel(u0)`` at each of ``times``.  Both trajectories are appended to
    ``keep`` when given."""
    lo, hi = float(u0.values.min()), float(u0.values.max())
    s = np.linspace(min(lo, -1.0), max(hi, 1.0), samples)
    if np.any(np.diff(relabel(s)) <= 0):
        raise ValueError("relabel must be strictly increasing")
    if abs(float(relabel(np.float64(0.0)))) > 1e-15:
        raise ValueError("relabel must fix 0")
    times = [float(t) for t in times]
    if any(not 0 < t <= T for t in times):
        raise ValueError("times must lie in (0, T]")
    w0 = u0.with_values(relabel(u0.values))
    out = []
    runs = [evolve(f, params, T, cfl_safety=cfl_safety, snapshot_times=tuple(times),
                   snapshot_stride=0) for f in (u0, w0)]
    if keep is not None:
        keep.extend(runs)
    snaps = [dict(r.snapshots) for r in runs]
    for t in times:
        a, b = extract_contour(snaps[0][t]), extract_contour(snaps[1][t])
        if not a and not b:
            out.append(0.0)
        elif not a or not b:
            out.append(float("inf"))
        else:
            out.append(hausdorff(a, b))
    return out


# --- explicit subsolution ---------------------------------------------------

@dataclass(frozen=True)
class SubsolutionParams:
    """Constants of the explicit subsolution ``g = e^{At}/(1+|x|^2) - 1``.

    ``A`` is not forced below ``bound`` so that the residual can also be
    probed where the lemma does not apply; see ``admissible``.
    """

    L1: float = 1.0
    L2: float = 1.0
    N: int = 2
    k: int = 1
    C_ball: float = 2.0
    A: float = -35.0

    def __post_init__(self):
        if not (self.L1 > 0 and self.L2 > 0):
            raise ValueError("L1 and L2 must be positive")
        if not 1 <= self.k < self.N:
            raise ValueError("need 1 <= k < N")

    @classmethod
    def ball_constant(cls, d: int) -> float:
        """Unit-ball measure in dimension ``d`` raised to ``1/d``."""
        return (math.pi ** (d / 2) / math.gamma(d / 2 + 1)) ** (1.0 / d)

    @property
    def bound(self) -> float:
        n = self.N
        return -(3 * self.L1 + 2 * self.C_ball * self.L1 + 2 * (self.L2 + 1) * (2 * n + 3))

    @property
    def admissible(self) -> bool:
        return self.A <= self.bound


def lemma51_residual(x, t, sp: SubsolutionParams = SubsolutionParams(),
                     exact_hessian: bool = False):
    """Residual of the subsolution inequality for ``g`` at ``(x, t)``.

    Uses the closed-form gradient, the line-measure bound ``C_ball |x|`` and,
    by default, the bound ``2 e^{At} (2N+3) / (1+|x|^2)^2`` on the max-row-sum
    norm of the Hessian.  ``exact_hessian`` uses the exact norm instead.

    ``x`` has shape ``(..., N)`` and broadcasts against ``t``; a scalar is
    returned for a single point.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (sp.N,):
        raise ValueError(f"x must have {sp.N} components on its last axis")
    t = np.asarray(t, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    r = np.sqrt(r2)
    e = np.exp(sp.A * t)
    q = 1.0 + r2
    gt = sp.A * e / q
    # Dg = -2 e x / q^2
    grad = 2.0 * e * r / q ** 2
    proj = 2.0 * e * np.sqrt(np.sum(x[..., sp.k:] ** 2, axis=-1)) / q ** 2
    if exact_hessian:
        eye = np.eye(sp.N)
        H = (-2.0 * eye / q[..., None, None] ** 2
             + 8.0 * x[..., :, None] * x[..., None, :] / q[..., None, None] ** 3)
        hess = np.asarray(e) * np.max(np.abs(H).sum(axis=-1), axis=-1)
    else:
        hess = 2.0 * e * (2 * sp.N + 3) / q ** 2
    out = (gt + sp.L1 * (1 + r) * grad + sp.L1 * sp.C_ball * r * proj
           + (sp.L2 + 1) * r2 * hess)
    return float(out) if np.ndim(out) == 0 else out


def lemma51_lattice(sp: SubsolutionParams = SubsolutionParams(), n: int = 100,
                    extent: float = 10.0, t_max: float = 1.0,
                    exact_hessian: bool = False) -> np.ndarray:
    """Residuals on ``n x n`` points of ``[-extent, extent]^2`` crossed with
    ``n`` times in ``[0, t_max]``; shape ``(n, n, n)`` indexed ``[a, b, time]``."""
    if sp.N != 2:
        raise ValueError("lattice helper is 2-D")
    s = np.linspace(-extent, extent, n)
    X = np.stack(np.meshgrid(s, s, indexing="ij"), axis=-1)[:, :, None, :]
    t = np.linspace(0.0, t_max, n)[None, None, :]
    return lemma51_residual(X, t, sp, exact_hessian)


# --- zero-gradient envelope -------------------------------------------------

def local_rhs(params: VelocityParams, p, hessian, measure: float, delta: float,
              amplitude: float = 1.0) -> float:
    """Right-hand side at a node with smooth local data: one-sided
    differences equal to ``p``, second derivatives ``(u11, u22, u12)`` and
    nonlocal factor ``measure`` (line measure, or area for volume_power)."""
    p1, p2 = float(p[0]), float(p[1])
    u11, u22, u12 = (float(v) for v in hessian)
    s = StencilSample(p1, p1, p2, p2, p1, p2, u11, u22, u12)
    out = 0.0
    if params.model == "volume_power":
        out = measure ** params.volume_exponent * math.hypot(p1, p2)
    elif not params.nonlocal_off:
        g = abs(p1) if params.model == "tomographic" else math.hypot(p1, p2)
        out = amplitude * measure * g
    if params.curvature_coef:
        out += params.curvature_coef * curvature_term(s, delta)
    return out


def audit_h2_envelope(params: VelocityParams, grid: GridSpec, samples: int = 500,
                      eps_p: float = 1e-6, delta: float = 1e-8, hessian=(0.0, 0.0, 0.0),
                      seed: int = 0) -> dict:
    """Spread of the rhs over gradients ``|p| <= eps_p`` and random sets.

    Sets are random subsets of a row of ``grid`` (random regions of the
    whole grid for volume_power); their weighted measure enters the rhs.
    """
    rng = np.random.default_rng(seed)
    nx, ny = grid.shape
    w = params.weight.cell_weights(grid)
    amp = params.amplitude
    a = 0.0 if callable(amp) else float(np.max(amp))
    vals = np.empty(samples)
    for k in range(samples):
        keep = rng.random(nx) < rng.random()
        if params.model == "volume_power":
            m = float(rng.binomial(nx * ny, rng.random())) * grid.h ** 2
        else:
            m = float(w[keep].sum())
        ang = rng.uniform(0, 2 * np.pi)
        rad = eps_p * rng.random() if k else 0.0
        vals[k] = local_rhs(params, (rad * np.cos(ang), rad * np.sin(ang)), hessian, m, delta, a)
    return {"samples": samples, "eps_p": eps_p, "delta": delta,
            "hessian": list(map(float, hessian)), "min": float(vals.min()),
            "max": float(vals.max()), "spread": float(vals.max() - vals.min())}


# --- limsup inclusion along converging sequences ---------------------------

def mollified_sequence(f: ScalarField, n_terms: int = 30, ratio: float = 0.5) -> list[ScalarField]:
    """``u_n = u + ratio**n (blur(u) - u)`` with a 3x3 box blur, so
    ``u_n -> u`` uniformly at geometric rate."""
    P = f.padded(1)
    nx, ny = f.grid.shape
    blur = sum(P[a:a + nx, b:b + ny] for a in range(3) for b in range(3)) / 9.0
    return [f.with_values(f.values + ratio ** n * (blur - f.values)) for n in range(1, n_terms + 1)]


def tie_sequence(f: ScalarField, z: int, j: int, n_terms: int = 30, sign: float = 1.0,
                 ratio: float = 0.5) -> list[ScalarField]:
    """``u_n = u + sign * ratio**n`` at node ``(z, j)`` only."""
    out = []
    for n in range(1, n_terms + 1):
        v = np.array(f.values)
        v[z, j] += sign * ratio ** n
        out.append(f.with_values(v))
    return out


def stability_check(f: ScalarField, i: int, j: int, n_terms: int = 30,
                    strict: bool = False) -> LimsupReport:
    """Limsup inclusion of the row sets through ``(i, j)`` along the mollified
    sequence, tested at every node of the row."""
    seq = mollified_sequence(f, n_terms)
    return limsup_inclusion_check(seq, [(i, j)] * n_terms, f, (i, j),
                                  range(f.grid.nx), strict=strict)


def tie_demo(f: ScalarField, i: int, j: int, z: int, n_terms: int = 30) -> dict:
    """Raise ``u`` at a tie node ``z`` by ``2**-n``.

    With strict sets ``{u_n > u_n(x)}`` the node is in every set of the
    sequence but not in the limit set; with weak sets it is in the limit
    set, so no violation can occur at ties.
    """
    if f.values[z, j] != f.values[i, j]:
        raise ValueError("z is not a tie with (i, j)")
    seq = tie_sequence(f, z, j, n_terms)
    pts = [(i, j)] * n_terms
    weak = limsup_inclusion_check(seq, pts, f, (i, j), [z], strict=False)
    strict = limsup_inclusion_check(seq, pts, f, (i, j), [z], strict=True)
    return {"weak_tie_violations": weak.tie_violations,
            "strict_tie_violations": strict.tie_violations}


# --- reports ----------------------------------------------------------------

def write_report(path, name: str, passed: bool, params: dict | None = None, **observed) -> dict:
    """JSON harness report (sorted keys, no timestamps)."""
    doc = {"check": name, "passed": bool(passed), "params": params or {},
           "observed": _plain(observed)}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return doc


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return _plain(asdict(obj))
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj
