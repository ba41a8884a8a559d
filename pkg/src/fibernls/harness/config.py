"""Experiment configuration: parsing and validation.

Configs are YAML or JSON documents with the sections below (every section
optional, every key optional unless noted). Unknown keys are rejected, and
every error names the offending field path.

.. code-block:: yaml

    model:   {c1: 1, c2: 1.0, rho: 1, equation: dissipative}
    fiber:   {alpha: 0.2, beta2: -1.0, gamma: 1.0, T0: 1.0, P0: 1.0}
    grid:    {t_min: -20, t_max: 20, n: 1024}
    solver:  {dz: 0.001, z_end: 1.0, snapshot_every: 10}      # z_end may be "auto"
    initial: {kind: gaussian, amplitude: 1.0, width: 1.0}     # | soliton {a} | file {path}
    bounds:  {epsilon: 0.1, delta: 0.05, variant: squared, L_fraction: 0.5}
    coefficients: {f: {...}, g: {...}, h: {...}, v2: {...}, z_min: 0, z_max: 1, n_z: 256}
    output:  {directory: out, formats: [csv, json, svg], fields: false}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import yaml

from ..bounds import Variant
from ..field import make_grid
from ..models import FiberParams, coefficient_from_config, normalize


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _num(value, path, *, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if integer and int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(path, f"must be > 0, got {value!r}")
    if nonneg and value < 0:
        raise ConfigError(path, f"must be >= 0, got {value!r}")
    return int(value) if integer else float(value)


def _section(data, path, allowed):
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(path, "expected a mapping")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}", "unknown key")
    return data


@dataclass
class ModelSpec:
    c1: int = 1
    c2: float = 1.0
    rho: Optional[int] = None
    equation: str = "dissipative"


@dataclass
class GridSpec:
    t_min: float = -20.0
    t_max: float = 20.0
    n: int = 1024


@dataclass
class SolverSpec:
    dz: float = 1e-3
    z_end: Union[float, str] = 1.0
    snapshot_every: int = 10


@dataclass
class InitialSpec:
    kind: str = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0
    a: float = 1.0
    path: Optional[Path] = None


@dataclass
class BoundSpec:
    epsilon: float = 0.1
    delta: Union[float, str] = "auto"
    variant: Variant = Variant.SQUARED
    L_fraction: float = 0.5
    K: Optional[float] = None
    C_tilde: Optional[float] = None
    max_iterations: int = 8


@dataclass
class OutputSpec:
    directory: Path = Path("out")
    formats: tuple = ("csv", "json", "svg")
    fields: bool = False


@dataclass
class ExperimentConfig:
    model: ModelSpec = field(default_factory=ModelSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    solver: SolverSpec = field(default_factory=SolverSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    bounds: BoundSpec = field(default_factory=BoundSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    fiber: Optional[FiberParams] = None
    coefficients: Optional[dict] = None
    base_dir: Path = Path(".")

    @property
    def rho(self) -> int:
        return self.model.c1 if self.model.rho is None else self.model.rho


_EQUATIONS = ("dissipative", "integrable", "cubic")
_FORMATS = ("csv", "json", "svg")


def _parse_fiber(data):
    sec = _section(data, "fiber", ("alpha", "beta2", "gamma", "T0", "P0"))
    missing = [k for k in ("alpha", "beta2", "gamma", "T0", "P0") if k not in sec]
    if missing:
        raise ConfigError(f"fiber.{missing[0]}", "required key missing")
    vals = {k: _num(sec[k], f"fiber.{k}") for k in sec}
    try:
        return FiberParams(**vals)
    except ValueError as exc:
        raise ConfigError("fiber", str(exc)) from None


def _parse_model(data, fiber):
    sec = _section(data, "model", ("c1", "c2", "rho", "equation"))
    spec = ModelSpec()
    if fiber is not None:
        norm = normalize(fiber)
        spec.c1, spec.c2 = norm.params.c1, norm.params.c2
    if "c1" in sec:
        c1 = _num(sec["c1"], "model.c1", integer=True)
        if c1 not in (1, -1):
            raise ConfigError("model.c1", "must be +1 or -1")
        if fiber is not None and c1 != spec.c1:
            raise ConfigError("model.c1", f"conflicts with fiber.beta2 (implies c1={spec.c1})")
        spec.c1 = c1
    if "c2" in sec:
        c2 = _num(sec["c2"], "model.c2", positive=True)
        if fiber is not None and not math.isclose(c2, spec.c2, rel_tol=1e-12):
            raise ConfigError("model.c2", f"conflicts with fiber parameters (imply c2={spec.c2})")
        spec.c2 = c2
    if "rho" in sec:
        rho = _num(sec["rho"], "model.rho", integer=True)
        if rho not in (1, -1):
            raise ConfigError("model.rho", "must be +1 or -1")
        spec.rho = rho
    if "equation" in sec:
        if sec["equation"] not in _EQUATIONS:
            raise ConfigError("model.equation", f"must be one of {_EQUATIONS}")
        spec.equation = sec["equation"]
    return spec


def _parse_grid(data):
    sec = _section(data, "grid", ("t_min", "t_max", "n"))
    spec = GridSpec()
    if "t_min" in sec:
        spec.t_min = _num(sec["t_min"], "grid.t_min")
    if "t_max" in sec:
        spec.t_max = _num(sec["t_max"], "grid.t_max")
    if "n" in sec:
        spec.n = _num(sec["n"], "grid.n", integer=True, positive=True)
    try:
        make_grid(spec.t_min, spec.t_max, spec.n)
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from None
    return spec


def _parse_solver(data):
    sec = _section(data, "solver", ("dz", "z_end", "snapshot_every"))
    spec = SolverSpec()
    if "dz" in sec:
        spec.dz = _num(sec["dz"], "solver.dz", positive=True)
    if "z_end" in sec:
        if sec["z_end"] == "auto":
            spec.z_end = "auto"
        else:
            spec.z_end = _num(sec["z_end"], "solver.z_end", nonneg=True)
    if "snapshot_every" in sec:
        spec.snapshot_every = _num(sec["snapshot_every"], "solver.snapshot_every",
                                   integer=True, positive=True)
    return spec


def _parse_initial(data, base_dir):
    sec = _section(data, "initial", ("kind", "amplitude", "width", "a", "path"))
    spec = InitialSpec()
    kind = sec.get("kind", "gaussian")
    allowed = {"gaussian": {"kind", "amplitude", "width"}, "soliton": {"kind", "a"},
               "file": {"kind", "path"}}
    if kind not in allowed:
        raise ConfigError("initial.kind", f"must be one of {sorted(allowed)}")
    extra = sorted(set(sec) - allowed[kind])
    if extra:
        raise ConfigError(f"initial.{extra[0]}", f"not valid for kind {kind!r}")
    spec.kind = kind
    if "amplitude" in sec:
        spec.amplitude = _num(sec["amplitude"], "initial.amplitude")
    if "width" in sec:
        spec.width = _num(sec["width"], "initial.width", positive=True)
    if "a" in sec:
        spec.a = _num(sec["a"], "initial.a", positive=True)
    if kind == "file":
        if "path" not in sec or not isinstance(sec["path"], str):
            raise ConfigError("initial.path", "a file path string is required")
        p = Path(sec["path"])
        spec.path = p if p.is_absolute() else base_dir / p
        if not spec.path.is_file():
            raise ConfigError("initial.path", f"file not found: {spec.path}")
    return spec


def _parse_bounds(data):
    sec = _section(data, "bounds", ("epsilon", "delta", "variant", "L_fraction", "K", "C_tilde",
                                    "max_iterations"))
    spec = BoundSpec()
    if "epsilon" in sec:
        spec.epsilon = _num(sec["epsilon"], "bounds.epsilon", positive=True)
    if "delta" in sec:
        spec.delta = "auto" if sec["delta"] == "auto" else _num(sec["delta"], "bounds.delta",
                                                                  positive=True)
    if "variant" in sec:
        try:
            spec.variant = Variant(sec["variant"])
        except ValueError:
            raise ConfigError("bounds.variant", f"must be one of {[v.value for v in Variant]}") from None
    if "L_fraction" in sec:
        frac = _num(sec["L_fraction"], "bounds.L_fraction", positive=True)
        if frac > 1:
            raise ConfigError("bounds.L_fraction", "must lie in (0, 1]")
        spec.L_fraction = frac
    for key in ("K", "C_tilde"):
        if key in sec:
            setattr(spec, key, _num(sec[key], f"bounds.{key}", nonneg=True))
    if (spec.K is None) != (spec.C_tilde is None):
        raise ConfigError("bounds.K" if spec.K is None else "bounds.C_tilde",
                          "K and C_tilde must be given together")
    if "max_iterations" in sec:
        spec.max_iterations = _num(sec["max_iterations"], "bounds.max_iterations",
                                   integer=True, positive=True)
    return spec


def _parse_output(data, base_dir):
    sec = _section(data, "output", ("directory", "formats", "fields"))
    spec = OutputSpec()
    if "directory" in sec:
        if not isinstance(sec["directory"], str):
            raise ConfigError("output.directory", "expected a path string")
        p = Path(sec["directory"])
        spec.directory = p if p.is_absolute() else base_dir / p
    else:
        spec.directory = base_dir / spec.directory
    if "formats" in sec:
        fm = sec["formats"]
        if not isinstance(fm, list) or any(f not in _FORMATS for f in fm):
            raise ConfigError("output.formats", f"expected a list drawn from {_FORMATS}")
        spec.formats = tuple(fm)
    if "fields" in sec:
        if not isinstance(sec["fields"], bool):
            raise ConfigError("output.fields", "expected true or false")
        spec.fields = sec["fields"]
    return spec


def _parse_coefficients(data, base_dir):
    sec = _section(data, "coefficients", ("f", "g", "h", "v0", "v1", "v2", "z_min", "z_max", "n_z"))
    for key in ("f", "g", "h", "v0", "v1", "v2"):
        if key in sec:
            try:
                coefficient_from_config(sec[key], base_dir)
            except (ValueError, OSError) as exc:
                raise ConfigError(f"coefficients.{key}", str(exc)) from None
    for key in ("f", "g"):
        if key not in sec:
            raise ConfigError(f"coefficients.{key}", "required key missing")
    out = dict(sec)
    out["z_min"] = _num(sec.get("z_min", 0.0), "coefficients.z_min")
    out["z_max"] = _num(sec.get("z_max", 1.0), "coefficients.z_max")
    out["n_z"] = _num(sec.get("n_z", 256), "coefficients.n_z", integer=True, positive=True)
    if out["z_max"] <= out["z_min"]:
        raise ConfigError("coefficients.z_max", "must exceed z_min")
    return out


def parse_config(data: dict, base_dir=".") -> ExperimentConfig:
    base_dir = Path(base_dir)
    data = {} if data is None else data
    top = _section(data, "", ("model", "fiber", "grid", "solver", "initial", "bounds",
                              "coefficients", "output"))
    fiber = _parse_fiber(top["fiber"]) if "fiber" in top else None
    cfg = ExperimentConfig(
        model=_parse_model(top.get("model"), fiber),
        grid=_parse_grid(top.get("grid")),
        solver=_parse_solver(top.get("solver")),
        initial=_parse_initial(top.get("initial"), base_dir),
        bounds=_parse_bounds(top.get("bounds")),
        output=_parse_output(top.get("output"), base_dir),
        fiber=fiber,
        coefficients=(_parse_coefficients(top["coefficients"], base_dir)
                      if "coefficients" in top else None),
        base_dir=base_dir,
    )
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc}") from None
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError("", f"cannot parse {path}: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError("", "top level must be a mapping")
    return parse_config(data, path.parent)
