"""Command-line entry point.

    nlfront <command> [check-name] --config <path> [--out <dir>]

Exit status: 0 on success, 1 on numerical instability or a failed check,
2 on a configuration error (nothing is written in that case).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, replace

import numpy as np

from .config import CHECKS, COMMANDS, ConfigError, RunConfig, load_config
from .contour import extract_contour, row_extent, write_contours
from .evolve import InstabilityError, Trajectory, evolve
from .front_init import Rectangle, perturb, rasterize
from .grid import ScalarField, write_snapshot
from .linesets import RowMeasureIndex, WeightTable, load_weight_table
from .properties import (audit_h2_envelope, check_comparison, check_relabel,
                         lemma51_lattice, lemma51_residual, random_ordered_pair,
                         stability_check, tie_demo, SubsolutionParams, write_report)
from .tomo import demo_params, make_phantom, reconstruct
from .velocity import VelocityParams, check_h3_monotone, rhs, upwind_grad1_field, differences

log = logging.getLogger("nlfront")


def build_initial(cfg: RunConfig, shape=None) -> ScalarField:
    grid = cfg.grid.spec()
    f = rasterize(shape or cfg.init.build(), grid, cfg.init.class_c)
    f = ScalarField(grid, f.values, cfg.grid.boundary)
    if cfg.init.perturb_amp > 0:
        f = perturb(f, cfg.init.perturb_seed, cfg.init.perturb_amp, cfg.init.perturb_modes)
    return f


def build_weight(cfg: RunConfig) -> WeightTable:
    v = cfg.velocity
    if v.weight == "constant":
        return WeightTable.const(v.weight_value)
    return load_weight_table(v.weight)


def build_params(cfg: RunConfig, **override) -> VelocityParams:
    v = cfg.velocity
    kw = dict(model=v.model, amplitude=v.amplitude, weight=build_weight(cfg),
              curvature_coef=v.curvature_coef, grad_reg_delta=v.delta,
              volume_exponent=v.volume_exponent)
    kw.update(override)
    return VelocityParams(**kw)


# --- outputs -----------------------------------------------------------------

def write_trajectory(cfg: RunConfig, traj: Trajectory, out: str) -> dict:
    o = cfg.output
    if o.snapshots:
        os.makedirs(os.path.join(out, "snapshots"), exist_ok=True)
    if o.contours:
        os.makedirs(os.path.join(out, "contours"), exist_ok=True)
    for k, (t, f) in enumerate(traj.snapshots):
        if o.snapshots:
            write_snapshot(os.path.join(out, "snapshots", f"u_{k:04d}.csv"), f, t)
        if o.contours:
            write_contours(os.path.join(out, "contours", f"contour_{k:04d}.csv"), extract_contour(f))
    if o.metrics:
        traj.write_metrics(os.path.join(out, "metrics.jsonl"))
    final = traj.final
    return {"reason": traj.reason, "steps": len(traj.metrics),
            "t_final": traj.snapshots[-1][0], "snapshots": len(traj.snapshots),
            "min_u": float(final.values.min()), "max_u": float(final.values.max())}


def write_summary(out: str, doc: dict) -> None:
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _evolve(cfg, f0, params):
    t = cfg.time
    return evolve(f0, params, t.T, cfl_safety=t.cfl_safety, snapshot_stride=t.snapshot_stride,
                  snapshot_times=t.snapshot_times, steady_tol=t.steady_tol)


# --- commands ----------------------------------------------------------------

def cmd_run(cfg: RunConfig, out: str) -> tuple[int, dict]:
    f0 = build_initial(cfg)
    params = build_params(cfg)
    try:
        traj = _evolve(cfg, f0, params)
    except InstabilityError as e:
        info = write_trajectory(cfg, e.trajectory, out) if e.trajectory else {}
        info.update(reason="instability", node=list(e.node or ()), message=str(e))
        return 1, info
    return 0, write_trajectory(cfg, traj, out)


def cmd_demo_rectangle(cfg: RunConfig, out: str) -> tuple[int, dict]:
    """Rectangle front under the tomographic velocity with g and C constant."""
    shape = cfg.init.build()
    if not isinstance(shape, Rectangle):
        shape = Rectangle(cfg.init.center, 0.5, 0.25)
    f0 = build_initial(replace(cfg, init=replace(cfg.init, perturb_amp=0.0)), shape)
    params = build_params(cfg, model="tomographic", curvature_coef=0.0)
    grid = f0.grid
    cx, cy = shape.center
    i_side = int(round((cx + shape.half_width_x1 - grid.origin[0]) / grid.h))
    i_mid = int(round((cx - grid.origin[0]) / grid.h))
    j_mid = int(round((cy - grid.origin[1]) / grid.h))
    j_top = int(round((cy + shape.half_width_x2 - grid.origin[1]) / grid.h))
    index = RowMeasureIndex(f0, params.weight)
    r = rhs(f0, params, 0.0, index)
    g1 = upwind_grad1_field(differences(f0))
    c = params.amplitude_at(f0, i_side, j_mid)
    m_side = index.query(j_mid, f0.values[i_side, j_mid])
    side = {"vertical_side_node": [i_side, j_mid],
            "vertical_side_measure": m_side,
            "vertical_side_speed": float(r[i_side, j_mid] / g1[i_side, j_mid]) if g1[i_side, j_mid] else 0.0,
            "vertical_side_rhs": float(r[i_side, j_mid]),
            "predicted_vertical_side_speed": c * 2 * shape.half_width_x1,
            "horizontal_side_node": [i_mid, j_top],
            "horizontal_side_rhs": float(r[i_mid, j_top])}
    try:
        traj = _evolve(cfg, f0, params)
    except InstabilityError as e:
        info = write_trajectory(cfg, e.trajectory, out) if e.trajectory else {}
        info.update(side, reason="instability", message=str(e))
        return 1, info
    info = write_trajectory(cfg, traj, out)
    L0 = row_extent(f0, j_mid)
    with open(os.path.join(out, "extent.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "extent", "predicted"])
        for t, f in traj.snapshots:
            w.writerow([format(t, ".17g"), format(row_extent(f, j_mid), ".17g"),
                        format(L0 * math.exp(2 * c * t), ".17g")])
    info.update(side)
    return 0, info


def cmd_demo_tomo(cfg: RunConfig, out: str) -> tuple[int, dict]:
    phantom = make_phantom(cfg.init.build(), cfg.grid.spec())
    params = demo_params(phantom, build_weight(cfg), c_in=cfg.velocity.amplitude)
    t = cfg.time
    try:
        rec = reconstruct(phantom, cfg.init.perturb_seed, cfg.init.perturb_amp, params, t.T,
                          cfl_safety=t.cfl_safety, snapshot_stride=t.snapshot_stride,
                          snapshot_times=t.snapshot_times, steady_tol=t.steady_tol)
    except InstabilityError as e:
        info = write_trajectory(cfg, e.trajectory, out) if e.trajectory else {}
        info.update(reason="instability", message=str(e))
        return 1, info
    info = write_trajectory(cfg, rec.trajectory, out)
    rec.write_distances(os.path.join(out, "distances.csv"))
    info.update(initial_distance=rec.initial_distance, final_distance=rec.final_distance,
                phantom_area=phantom.area)
    return 0, info


def run_check(name: str, cfg: RunConfig, out: str) -> tuple[bool, dict, dict]:
    """Run one harness check; returns ``(passed, params, observed)``."""
    c = cfg.check
    grid = cfg.grid.spec()
    h = grid.h
    if name == "comparison":
        params = build_params(cfg)
        sups = []
        for k in range(c.pairs):
            u0, v0 = random_ordered_pair(grid, c.seed + k, "nested" if k % 2 == 0 else "offset")
            sups.append(check_comparison(u0, v0, params, cfg.time.T, cfg.time.cfl_safety).sup_violation)
        return max(sups) <= 1e-10, {"pairs": c.pairs, "T": cfg.time.T, "model": params.model}, \
            {"sup_violation": max(sups), "per_pair": sups}
    if name == "relabel":
        params = build_params(cfg)
        u0 = build_initial(cfg)
        times = cfg.time.snapshot_times or (cfg.time.T / 2, cfg.time.T)
        maps = {"2s": lambda s: 2 * s, "tanh(2s)": lambda s: np.tanh(2 * s)}
        obs = {k: check_relabel(u0, m, params, cfg.time.T, times, cfg.time.cfl_safety)
               for k, m in maps.items()}
        worst = max(max(v) for v in obs.values())
        return worst <= 2 * h, {"times": list(times), "bound": 2 * h}, {"distances": obs, "max": worst}
    if name == "lemma51":
        sp = SubsolutionParams()
        lat = lemma51_lattice(sp)
        exact = lemma51_lattice(sp, exact_hessian=True)
        at0 = lemma51_residual(np.zeros(2), 0.0, sp)
        ok = lat.max() <= 1e-12 and exact.max() <= 1e-12 and at0 == sp.A
        return ok, asdict(sp), {"max_residual": float(lat.max()),
                                "max_residual_exact_hessian": float(exact.max()),
                                "residual_at_origin": at0}
    if name == "h2":
        params = build_params(cfg)
        seq = [audit_h2_envelope(params, grid, c.samples, eps, eps, seed=c.seed)
               for eps in (1e-2, 1e-4, 1e-6, 1e-8)]
        iso = audit_h2_envelope(params, grid, c.samples, 1e-8, 1e-8, (2.0, 2.0, 0.0), c.seed)
        spreads = [s["spread"] for s in seq]
        ok = spreads[-1] <= 1e-3 and iso["spread"] <= 1e-3 and all(
            b <= a for a, b in zip(spreads, spreads[1:]))
        return ok, {"samples": c.samples}, {"spreads": spreads, "isotropic_hessian": iso}
    if name == "h3":
        params = build_params(cfg)
        rep = check_h3_monotone(params, build_initial(cfg), c.samples, c.seed)
        return rep["violations"] == 0, {"samples": c.samples}, rep
    if name == "stability":
        f = build_initial(cfg)
        cx, cy = cfg.init.center
        i = int(round((cx - grid.origin[0]) / h))
        j = int(round((cy - grid.origin[1]) / h))
        rep = stability_check(f, i, j)
        obs = {"violations": rep.violations, "ties": len(rep.ties),
               "tie_violations": rep.tie_violations}
        ties = [z for z in rep.ties if z != i]
        if ties:
            obs["tie_demo"] = tie_demo(f, i, j, ties[0])
        return not rep.violations, {"node": [i, j]}, obs
    raise ValueError(f"unknown check {name!r}")


def cmd_check(name: str, cfg: RunConfig, out: str) -> tuple[int, dict]:
    ok, params, obs = run_check(name, cfg, out)
    write_report(os.path.join(out, f"check_{name}.json"), name, ok, params, **obs)
    return (0 if ok else 1), {"check": name, "passed": ok}


def run(cfg: RunConfig, out: str | None = None, check_name: str | None = None) -> int:
    out = out or cfg.output.directory
    name = check_name or cfg.check.name
    if cfg.command == "check" and name not in CHECKS:
        print(f"config error: check name must be one of {', '.join(CHECKS)}", file=sys.stderr)
        return 2
    if cfg.command == "demo-tomo":
        try:
            make_phantom(cfg.init.build(), cfg.grid.spec())
        except ValueError as e:
            print(f"config error: {e}", file=sys.stderr)
            return 2
    os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    if cfg.command == "run":
        code, info = cmd_run(cfg, out)
    elif cfg.command == "demo-rectangle":
        code, info = cmd_demo_rectangle(cfg, out)
    elif cfg.command == "demo-tomo":
        code, info = cmd_demo_tomo(cfg, out)
    else:
        code, info = cmd_check(name, cfg, out)
    info.update(command=cfg.command, exit_status=code,
                wall_time=time.perf_counter() - t0)
    write_summary(out, info)
    if code == 1 and info.get("reason") == "instability":
        print(f"instability: {info.get('message')}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="nlfront", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("name", nargs="?", help="check name (for the check command)")
    ap.add_argument("--config", required=True)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except OSError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ConfigError as e:
        for msg in e.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return 2
    if args.command == "check" and args.name not in CHECKS and cfg.check.name is None:
        print(f"config error: check needs a name from {', '.join(CHECKS)}", file=sys.stderr)
        return 2
    return run(replace(cfg, command=args.command), args.out, args.name)


if __name__ == "__main__":
    sys.exit(main())
