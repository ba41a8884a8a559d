"""Strang split-step Fourier propagation for the three normalized models.

    dissipative:  i u_z + u_tt + c1 e^{-c2 z} |u|^2 u = 0
    integrable:   i v_z + v_tt + c1 e^{-c2 z} |v|^2 v + (c2^2/4) t^2 v = 0
    cubic:        i Q_Z + Q_TT + rho |Q|^2 Q = 0

One step is half a pointwise phase step, one full dispersion step, and
another half phase step. Every substep is solved exactly. The dispersion
multiplier is ``exp(-i k^2 dz)``. The phase substep over ``[a, a+s]`` rotates
by ``c1 |u|^2 int_a^{a+s} e^{-c2 z'} dz'`` (|u| is frozen there), plus
``(c2^2/4) t^2 s`` for the integrable model. Hence the L2 norm is conserved to
FFT roundoff.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from . import kernels
from .field import (ComplexField, Grid, dtt_norm, l2_norm, mass, spectral_derivative,
                    weighted_norm_t2, weighted_norm_t_ut)
from .models import DimensionlessParams

GROWTH_LIMIT = 1.10
AMPLITUDE_LIMIT = 1e6
_SMALL_DECAY = 1e-8


class StepInstability(RuntimeError):
    """Mass grew by more than 10% or the amplitude exploded during a step."""

    def __init__(self, message: str, z: Optional[float] = None):
        super().__init__(message if z is None else f"{message} (at z={z:.6g})")
        self.z = z


class Tag(str, enum.Enum):
    DISSIPATIVE = "dissipative"
    INTEGRABLE = "integrable"
    CUBIC = "cubic"


@dataclass(frozen=True)
class ModelKind:
    tag: Tag
    params: DimensionlessParams = dc_field(default_factory=DimensionlessParams)

    def __post_init__(self):
        object.__setattr__(self, "tag", Tag(self.tag))

    @classmethod
    def dissipative(cls, c1=1, c2=1.0) -> "ModelKind":
        return cls(Tag.DISSIPATIVE, DimensionlessParams(c1=c1, c2=c2))

    @classmethod
    def integrable(cls, c1=1, c2=1.0) -> "ModelKind":
        return cls(Tag.INTEGRABLE, DimensionlessParams(c1=c1, c2=c2))

    @classmethod
    def cubic(cls, rho=1) -> "ModelKind":
        return cls(Tag.CUBIC, DimensionlessParams(c1=rho, c2=1.0, rho=rho))

    def nonlinear_coefficient(self, z) -> np.ndarray:
        """Coefficient of ``|u|^2 u`` at coordinate ``z``."""
        if self.tag is Tag.CUBIC:
            return np.full_like(np.asarray(z, dtype=float), float(self.params.rho))
        return self.params.c1 * np.exp(-self.params.c2 * np.asarray(z, dtype=float))

    def potential(self, grid: Grid) -> Optional[np.ndarray]:
        if self.tag is Tag.INTEGRABLE:
            return 0.25 * self.params.c2**2 * grid.t2
        return None


@dataclass(frozen=True)
class SplitStepConfig:
    dz: float
    snapshot_every: int = 1
    track_sup: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.dz) and self.dz > 0):
            raise ValueError(f"dz must be > 0, got {self.dz}")
        if int(self.snapshot_every) != self.snapshot_every or self.snapshot_every < 1:
            raise ValueError(f"snapshot_every must be a positive integer, got {self.snapshot_every}")

    def stability_hint(self, grid: Grid) -> float:
        """``dz * k_max^2``; values above pi alias the dispersion phase."""
        return self.dz * grid.k_max**2


def integrated_decay(c2: float, z: float, s: float) -> float:
    """``int_z^{z+s} exp(-c2 z') dz'`` for either sign of ``s``."""
    x = c2 * s
    if abs(x) < _SMALL_DECAY:
        return s * math.exp(-c2 * z) * (1.0 - 0.5 * x)
    return math.exp(-c2 * z) * (-math.expm1(-x)) / c2


class _Stepper:
    """Caches the multipliers for one (model, grid, dz) triple."""

    def __init__(self, model: ModelKind, grid: Grid, dz: float):
        self.model = model
        self.grid = grid
        self.dz = dz
        self.linear = np.exp(-1j * grid.wavenumbers**2 * dz)
        pot = model.potential(grid)
        self.half_potential = None if pot is None else np.ascontiguousarray(pot * (0.5 * dz))

    def _phase(self, values: np.ndarray, z: float, s: float, potential) -> None:
        m = self.model
        if m.tag is Tag.CUBIC:
            coef = m.params.rho * s
        else:
            coef = m.params.c1 * integrated_decay(m.params.c2, z, s)
        kernels.phase_rotate(values, coef, potential)

    def advance(self, values: np.ndarray, z: float) -> np.ndarray:
        half = 0.5 * self.dz
        out = values.copy()
        self._phase(out, z, half, self.half_potential)
        out = np.fft.ifft(self.linear * np.fft.fft(out))
        self._phase(out, z + half, half, self.half_potential)
        return out


def _guard(before_mass: float, values: np.ndarray, dt: float, z: float) -> None:
    peak2 = kernels.max_abs2(values)
    if not math.isfinite(peak2) or peak2 > AMPLITUDE_LIMIT**2:
        raise StepInstability("amplitude exceeded the blow-up guard", z)
    after = kernels.weighted_sq_sum(values, None) * dt
    if after > GROWTH_LIMIT * before_mass and after > 1e-300:
        raise StepInstability(f"mass grew from {before_mass:.6g} to {after:.6g}", z)


def step(model: ModelKind, field: ComplexField, dz: float) -> ComplexField:
    """Advance ``field`` by ``dz`` (negative ``dz`` steps backward)."""
    if not math.isfinite(dz) or dz == 0:
        raise ValueError("dz must be finite and nonzero")
    stepper = _Stepper(model, field.grid, dz)
    before = mass(field)
    out = stepper.advance(field.values, field.z)
    _guard(before, out, field.grid.dt, field.z + dz)
    return ComplexField(field.grid, out, field.z + dz)


@dataclass
class Trajectory:
    model: ModelKind
    z_values: np.ndarray
    snapshots: list
    l2: np.ndarray
    t2_moment: np.ndarray
    t_ut_moment: np.ndarray
    sup_abs2: float = 0.0
    sup_dtt: Optional[float] = None
    steps: int = 0

    def __len__(self):
        return len(self.snapshots)

    @property
    def final(self) -> ComplexField:
        return self.snapshots[-1]

    def observables(self) -> list:
        return [{"z": float(z), "l2": float(a), "t2_moment": float(b), "t_ut_moment": float(c)}
                for z, a, b, c in zip(self.z_values, self.l2, self.t2_moment, self.t_ut_moment)]


class _Recorder:
    def __init__(self, track_sup: bool):
        self.z, self.snaps, self.l2, self.t2, self.tut = [], [], [], [], []
        self.sup_abs2 = 0.0
        self.sup_dtt = 0.0 if track_sup else None

    def watch(self, f: ComplexField) -> None:
        self.sup_abs2 = max(self.sup_abs2, kernels.max_abs2(f.values))
        if self.sup_dtt is not None:
            self.sup_dtt = max(self.sup_dtt, dtt_norm(f))

    def record(self, f: ComplexField) -> None:
        self.z.append(f.z)
        self.snaps.append(f)
        self.l2.append(l2_norm(f))
        self.t2.append(weighted_norm_t2(f))
        self.tut.append(weighted_norm_t_ut(f))

    def build(self, model: ModelKind, steps: int) -> Trajectory:
        return Trajectory(model, np.asarray(self.z), self.snaps, np.asarray(self.l2),
                          np.asarray(self.t2), np.asarray(self.tut), self.sup_abs2,
                          self.sup_dtt, steps)


def evolve(model: ModelKind, initial: ComplexField, z_end: float, config: SplitStepConfig,
           record_at=None) -> Trajectory:
    """Propagate ``initial`` (at z = 0) to ``z_end``.

    Snapshots are taken every ``config.snapshot_every`` steps and at
    ``z_end``; the last step is shortened if ``dz`` does not divide
    ``z_end``. With ``record_at`` (increasing coordinates in ``(0, z_end]``)
    snapshots land exactly on those coordinates instead: each gap is split
    into equal steps no longer than ``dz``.
    """
    if initial.z != 0.0:
        raise ValueError(f"initial field must sit at z=0, got z={initial.z}")
    if not (math.isfinite(z_end) and z_end >= 0):
        raise ValueError(f"z_end must be >= 0, got {z_end}")
    rec = _Recorder(config.track_sup)
    current = initial.copy()
    rec.watch(current)
    rec.record(current)
    if z_end == 0:
        return rec.build(model, 0)

    grid = initial.grid
    steppers = {}

    def stepper_for(h):
        key = float(h)
        if key not in steppers:
            steppers[key] = _Stepper(model, grid, key)
        return steppers[key]

    nsteps = 0
    z = 0.0
    values = current.values

    def advance(h):
        nonlocal z, values, nsteps
        before = kernels.weighted_sq_sum(values, None) * grid.dt
        values = stepper_for(h).advance(values, z)
        _guard(before, values, grid.dt, z + h)
        z += h
        nsteps += 1
        if config.track_sup:
            rec.watch(ComplexField(grid, values, z))
        else:
            rec.sup_abs2 = max(rec.sup_abs2, kernels.max_abs2(values))

    if record_at is None:
        n_full = int(math.floor(z_end / config.dz * (1 + 1e-12)))
        for i in range(1, n_full + 1):
            advance(config.dz)
            z = i * config.dz
            if i % config.snapshot_every == 0:
                rec.record(ComplexField(grid, values, z))
        remainder = z_end - n_full * config.dz
        if remainder > 1e-12 * max(1.0, z_end):
            advance(remainder)
            z = z_end
            rec.record(ComplexField(grid, values, z))
        elif not rec.z or rec.z[-1] != z:
            rec.record(ComplexField(grid, values, z))
    else:
        targets = [float(t) for t in np.asarray(record_at, dtype=float)]
        if targets and (targets[0] <= 0 or any(b <= a for a, b in zip(targets, targets[1:]))
                        or targets[-1] > z_end * (1 + 1e-12)):
            raise ValueError("record_at must be strictly increasing inside (0, z_end]")
        if not targets or targets[-1] < z_end * (1 - 1e-12):
            targets.append(z_end)
        start = 0.0
        for target in targets:
            gap = target - start
            k = max(1, int(math.ceil(gap / config.dz - 1e-9)))
            h = gap / k
            for _ in range(k):
                advance(h)
            z = target
            rec.record(ComplexField(grid, values, z))
            start = target
    return rec.build(model, nsteps)


def residual(model: ModelKind, traj: Trajectory, index: int) -> float:
    """Grid max of the PDE residual at an interior snapshot.

    ``d/dz`` is the centered difference of the neighbouring snapshots (which
    must be equally spaced); ``d^2/dt^2`` is spectral.
    """
    if index < 1 or index >= len(traj.snapshots) - 1:
        raise IndexError(f"snapshot {index} has no neighbours on both sides")
    zm, z0, zp = traj.z_values[index - 1: index + 2]
    hm, hp = z0 - zm, zp - z0
    if not math.isclose(hm, hp, rel_tol=1e-9, abs_tol=1e-14):
        raise ValueError("snapshots around the index are not equally spaced")
    prev, cur, nxt = traj.snapshots[index - 1: index + 2]
    dz_term = 1j * (nxt.values - prev.values) / (2.0 * hp)
    dtt = spectral_derivative(cur, order=2).values
    u = cur.values
    r = dz_term + dtt + model.nonlinear_coefficient(z0) * (np.abs(u) ** 2) * u
    pot = model.potential(cur.grid)
    if pot is not None:
        r = r + pot * u
    return float(np.max(np.abs(r)))
