"""``key = value`` run configuration with ``[section]`` headers.

Every problem found is reported with its line number; parsing does not stop
at the first one.  ``format_config`` prints every key, so
``parse_config(format_config(c)) == c``.
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field, fields, replace

from .front_init import Annulus, Disk, Rectangle
from .grid import CLAMP, MIRROR, GridSpec
from .velocity import MODELS

log = logging.getLogger(__name__)

COMMANDS = ("run", "check", "demo-tomo", "demo-rectangle")
CHECKS = ("comparison", "relabel", "lemma51", "h2", "h3", "stability")
AUTO = "auto"


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("\n".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class GridConfig:
    origin: tuple[float, float] = (-2.0, -2.0)
    h: float = 0.01
    dims: tuple[int, int] = (401, 401)
    boundary: str = CLAMP

    def spec(self) -> GridSpec:
        return GridSpec(self.origin, self.h, *self.dims)


@dataclass(frozen=True)
class InitConfig:
    shape: str = "disk"
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 0.5
    half_width_x1: float = 0.5
    half_width_x2: float = 0.25
    r_inner: float = 0.3
    r_outer: float = 0.6
    class_c: bool = True
    perturb_seed: int = 0
    perturb_amp: float = 0.0
    perturb_modes: int = 3

    def build(self):
        if self.shape == "disk":
            return Disk(self.center, self.radius)
        if self.shape == "rectangle":
            return Rectangle(self.center, self.half_width_x1, self.half_width_x2)
        return Annulus(self.center, self.r_inner, self.r_outer)


@dataclass(frozen=True)
class VelocityConfig:
    model: str = "tomographic"
    amplitude_mode: str = "constant"
    amplitude: float = 1.0
    weight: str = "constant"
    weight_value: float = 1.0
    curvature_coef: float = 0.0
    delta: float | None = None
    volume_exponent: float = 0.5


@dataclass(frozen=True)
class TimeConfig:
    T: float = 0.2
    cfl_safety: float = 0.5
    snapshot_stride: int = 0
    snapshot_times: tuple[float, ...] = ()
    steady_tol: float | None = None


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    snapshots: bool = True
    metrics: bool = True
    contours: bool = True


@dataclass(frozen=True)
class CheckConfig:
    name: str | None = None
    pairs: int = 20
    samples: int = 1000
    seed: int = 0


@dataclass(frozen=True)
class RunConfig:
    command: str = "run"
    grid: GridConfig = field(default_factory=GridConfig)
    init: InitConfig = field(default_factory=InitConfig)
    velocity: VelocityConfig = field(default_factory=VelocityConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    check: CheckConfig = field(default_factory=CheckConfig)


SECTIONS = {"grid": GridConfig, "init": InitConfig, "velocity": VelocityConfig,
            "time": TimeConfig, "output": OutputConfig, "check": CheckConfig}


# --- value parsers -----------------------------------------------------------

def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"expected a finite number, got {s!r}")
    return v


def _int(s):
    return int(s)


def _bool(s):
    v = s.lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _pair(conv):
    def parse(s):
        parts = [p.strip() for p in s.split(",")]
        if len(parts) != 2:
            raise ValueError(f"expected two comma-separated values, got {s!r}")
        return conv(parts[0]), conv(parts[1])
    return parse


def _floats(s):
    return tuple(_float(p) for p in s.split(",") if p.strip())


def _optional(conv):
    def parse(s):
        return None if s.lower() == AUTO else conv(s)
    return parse


def _optional_str(s):
    return None if s.lower() == AUTO else s


PARSERS = {
    "grid": {"origin": _pair(_float), "h": _float, "dims": _pair(_int), "boundary": str},
    "init": {"shape": str, "center": _pair(_float), "radius": _float,
             "half_width_x1": _float, "half_width_x2": _float, "r_inner": _float,
             "r_outer": _float, "class_c": _bool, "perturb_seed": _int,
             "perturb_amp": _float, "perturb_modes": _int},
    "velocity": {"model": str, "amplitude_mode": str, "amplitude": _float, "weight": str,
                 "weight_value": _float, "curvature_coef": _float,
                 "delta": _optional(_float), "volume_exponent": _float},
    "time": {"T": _float, "cfl_safety": _float, "snapshot_stride": _int,
             "snapshot_times": _floats, "steady_tol": _optional(_float)},
    "output": {"directory": str, "snapshots": _bool, "metrics": _bool, "contours": _bool},
    "check": {"name": _optional_str, "pairs": _int, "samples": _int, "seed": _int},
}

# constraint -> message, checked per key
RULES = {
    ("grid", "h"): (lambda v: v > 0, "grid.h > 0"),
    ("grid", "dims"): (lambda v: min(v) >= 3, "grid.dims >= 3 in each direction"),
    ("grid", "boundary"): (lambda v: v in (CLAMP, MIRROR), f"grid.boundary in {{{CLAMP}, {MIRROR}}}"),
    ("init", "shape"): (lambda v: v in ("disk", "rectangle", "annulus"),
                        "init.shape in {disk, rectangle, annulus}"),
    ("init", "radius"): (lambda v: v > 0, "init.radius > 0"),
    ("init", "half_width_x1"): (lambda v: v > 0, "init.half_width_x1 > 0"),
    ("init", "half_width_x2"): (lambda v: v > 0, "init.half_width_x2 > 0"),
    ("init", "r_inner"): (lambda v: v > 0, "init.r_inner > 0"),
    ("init", "r_outer"): (lambda v: v > 0, "init.r_outer > 0"),
    ("init", "perturb_amp"): (lambda v: v >= 0, "init.perturb_amp >= 0"),
    ("init", "perturb_modes"): (lambda v: v >= 1, "init.perturb_modes >= 1"),
    ("velocity", "model"): (lambda v: v in MODELS, f"velocity.model in {{{', '.join(MODELS)}}}"),
    ("velocity", "amplitude_mode"): (lambda v: v in ("constant", "edge_stop"),
                                     "velocity.amplitude_mode in {constant, edge_stop}"),
    ("velocity", "amplitude"): (lambda v: v >= 0, "velocity.amplitude >= 0"),
    ("velocity", "weight_value"): (lambda v: v > 0, "velocity.weight_value > 0"),
    ("velocity", "curvature_coef"): (lambda v: v >= 0, "velocity.curvature_coef >= 0"),
    ("velocity", "delta"): (lambda v: v is None or v > 0, "velocity.delta > 0"),
    ("velocity", "volume_exponent"): (lambda v: v > 0, "velocity.volume_exponent > 0"),
    ("time", "T"): (lambda v: v > 0, "time.T > 0"),
    ("time", "cfl_safety"): (lambda v: 0 < v <= 1, "0 < time.cfl_safety <= 1"),
    ("time", "snapshot_stride"): (lambda v: v >= 0, "time.snapshot_stride >= 0"),
    ("time", "snapshot_times"): (lambda v: all(t > 0 for t in v), "time.snapshot_times > 0"),
    ("time", "steady_tol"): (lambda v: v is None or v > 0, "time.steady_tol > 0"),
    ("check", "name"): (lambda v: v is None or v in CHECKS, f"check.name in {{{', '.join(CHECKS)}}}"),
    ("check", "pairs"): (lambda v: v >= 1, "check.pairs >= 1"),
    ("check", "samples"): (lambda v: v >= 1, "check.samples >= 1"),
}


def parse_config(text: str, base_dir: str | None = None) -> RunConfig:
    """Parse and validate; raises ``ConfigError`` listing every problem.

    A relative weight file path is resolved against ``base_dir`` when given.
    """
    errors: list[str] = []
    values: dict[str, dict] = {s: {} for s in SECTIONS}
    lines: dict[tuple[str, str], int] = {}
    command = "run"
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in SECTIONS:
                errors.append(f"line {lineno}: unknown section [{name}]")
                section = "?"
            else:
                section = name
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, val = (p.strip() for p in line.split("=", 1))
        if section is None:
            if key == "command":
                if val not in COMMANDS:
                    errors.append(f"line {lineno}: command must be one of {', '.join(COMMANDS)}")
                command = val
            else:
                errors.append(f"line {lineno}: key {key!r} outside any section")
            continue
        if section == "?":
            continue
        if key not in PARSERS[section]:
            errors.append(f"line {lineno}: unknown key {section}.{key}")
            continue
        if (section, key) in lines:
            errors.append(f"line {lineno}: duplicate key {section}.{key} "
                          f"(first set on line {lines[section, key]})")
            continue
        lines[section, key] = lineno
        try:
            v = PARSERS[section][key](val)
        except ValueError as e:
            errors.append(f"line {lineno}: {section}.{key}: type mismatch ({e})")
            continue
        rule = RULES.get((section, key))
        if rule and not rule[0](v):
            errors.append(f"line {lineno}: {section}.{key} = {val} violates {rule[1]}")
            continue
        values[section][key] = v

    def at(section, key):
        n = lines.get((section, key))
        return f"line {n}" if n else f"{section}.{key} (default)"

    parts = {s: replace(cls(), **values[s]) for s, cls in SECTIONS.items()}
    init, vel, grid = parts["init"], parts["velocity"], parts["grid"]
    if init.shape == "annulus" and not init.r_inner < init.r_outer:
        errors.append(f"{at('init', 'r_outer')}: init.r_inner < init.r_outer required")
    if vel.weight != "constant":
        path = vel.weight
        if base_dir and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        if not os.path.isfile(path):
            errors.append(f"{at('velocity', 'weight')}: weight file not found: {vel.weight}")
        else:
            parts["velocity"] = vel = replace(vel, weight=path)
    elif ("velocity", "weight") not in lines and vel.model != "volume_power":
        log.info("no weight given; using constant g = %s", vel.weight_value)
    if not errors:
        try:
            spec = grid.spec()
            shape = init.build()
        except ValueError as e:
            errors.append(f"{at('init', 'shape')}: {e}")
        else:
            (cx, cy), (ex, ey) = shape.center, shape.extent
            margin = 2 * spec.h
            if not (spec.contains((cx - ex, cy - ey), margin)
                    and spec.contains((cx + ex, cy + ey), margin)):
                errors.append(f"{at('init', 'shape')}: shape must lie inside the grid "
                              f"with a margin of 2h")
    if errors:
        raise ConfigError(errors)
    return RunConfig(command=command, **parts)


def _fmt(v) -> str:
    if v is None:
        return AUTO
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def format_config(cfg: RunConfig) -> str:
    out = [f"command = {cfg.command}"]
    for s in SECTIONS:
        out.append("")
        out.append(f"[{s}]")
        part = getattr(cfg, s)
        for fld in fields(part):
            out.append(f"{fld.name} = {_fmt(getattr(part, fld.name))}")
    return "\n".join(out) + "\n"


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))
