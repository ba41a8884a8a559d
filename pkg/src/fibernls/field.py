"""Periodic time grid, sampled complex envelopes, and the norms used by the bounds.

The real line is truncated to a periodic box ``[t_min, t_max)``. Moment norms
such as ``||t^2 u||`` are only meaningful for fields that have decayed to
(numerically) zero well before the box edges; :func:`is_edge_decaying` is the
check for that.

All integrals use the rectangle rule on the periodic grid, which coincides
with the trapezoid rule there and is spectrally accurate for smooth decaying
integrands.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import kernels

MIN_SAMPLES = 16
EDGE_FRACTION = 0.05


class GridError(ValueError):
    """Raised for an invalid grid specification."""


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform periodic grid ``t_j = t_min + j*dt``, ``j = 0..n-1``.

    ``wavenumbers`` follow the numpy FFT ordering (zero first, Nyquist mode
    negative). The moment weights ``t**2`` and ``t**4`` are precomputed
    because every observable needs them.
    """

    t_min: float
    t_max: float
    n: int
    dt: float = dc_field(init=False)
    t: np.ndarray = dc_field(init=False, repr=False)
    wavenumbers: np.ndarray = dc_field(init=False, repr=False)
    t2: np.ndarray = dc_field(init=False, repr=False)
    t4: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.t_min) and np.isfinite(self.t_max)) or self.t_max <= self.t_min:
            raise GridError(f"invalid domain: need t_max > t_min, got ({self.t_min}, {self.t_max})")
        n = self.n
        if int(n) != n or n < MIN_SAMPLES or (int(n) & (int(n) - 1)) != 0:
            raise GridError(f"invalid size: n must be a power of two >= {MIN_SAMPLES}, got {n}")
        n = int(n)
        dt = (self.t_max - self.t_min) / n
        t = self.t_min + dt * np.arange(n)
        k = 2.0 * np.pi * np.fft.fftfreq(n, d=dt)
        for name, value in (("n", n), ("dt", dt), ("t", t), ("wavenumbers", k),
                            ("t2", t**2), ("t4", t**4)):
            object.__setattr__(self, name, value)
        for arr in (t, k, self.t2, self.t4):
            arr.setflags(write=False)

    @property
    def length(self) -> float:
        return self.t_max - self.t_min

    @property
    def k_max(self) -> float:
        return float(np.max(np.abs(self.wavenumbers)))

    def contains(self, points) -> np.ndarray:
        """Boolean mask of points lying inside the closed box."""
        points = np.asarray(points, dtype=float)
        return (points >= self.t_min) & (points <= self.t_max)

    def same_as(self, other: "Grid") -> bool:
        return (self.n == other.n and self.t_min == other.t_min
                and self.t_max == other.t_max)


def make_grid(t_min: float, t_max: float, n: int) -> Grid:
    return Grid(float(t_min), float(t_max), n)


@dataclass(eq=False)
class ComplexField:
    """Complex envelope sampled on ``grid`` at evolution coordinate ``z``."""

    grid: Grid
    values: np.ndarray
    z: float = 0.0

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if values.shape != (self.grid.n,):
            raise ValueError(f"values must have shape ({self.grid.n},), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        self.values = values
        self.z = float(self.z)

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy(), self.z)

    def with_values(self, values, z=None) -> "ComplexField":
        return ComplexField(self.grid, values, self.z if z is None else z)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        if not self.grid.same_as(other.grid):
            raise ValueError("fields live on different grids")
        return ComplexField(self.grid, self.values - other.values, self.z)


def zeros(grid: Grid, z: float = 0.0) -> ComplexField:
    return ComplexField(grid, np.zeros(grid.n, dtype=np.complex128), z)


def l2_norm(field: ComplexField) -> float:
    return float(np.sqrt(kernels.weighted_sq_sum(field.values, None) * field.grid.dt))


def mass(field: ComplexField) -> float:
    """Squared L2 norm."""
    return kernels.weighted_sq_sum(field.values, None) * field.grid.dt


def sup_norm(field: ComplexField) -> float:
    return float(np.sqrt(kernels.max_abs2(field.values)))


def spectrum(field: ComplexField) -> np.ndarray:
    return np.fft.fft(field.values)


def spectral_derivative(field: ComplexField, order: int = 1) -> ComplexField:
    """Derivative in t via the Fourier multiplier ``(i k)**order``.

    The Nyquist mode is dropped for odd orders so that real input yields real
    output. Assumes the field decays at the box edges; otherwise the periodic
    wrap-around contaminates the result.
    """
    k = field.grid.wavenumbers
    mult = (1j * k) ** order
    if order % 2 == 1:
        mult = mult.copy()
        mult[field.grid.n // 2] = 0.0
    return field.with_values(np.fft.ifft(mult * np.fft.fft(field.values)))


def weighted_norm_t2(field: ComplexField) -> float:
    """``||t^2 u||_{L2}``."""
    return float(np.sqrt(kernels.weighted_sq_sum(field.values, field.grid.t4) * field.grid.dt))


def weighted_norm_t_ut(field: ComplexField) -> float:
    """``||t u_t||_{L2}`` with the derivative taken spectrally."""
    du = spectral_derivative(field).values
    return float(np.sqrt(kernels.weighted_sq_sum(du, field.grid.t2) * field.grid.dt))


def dtt_norm(field: ComplexField) -> float:
    """``||u_tt||_{L2}`` computed in Fourier space (Parseval)."""
    spec = np.fft.fft(field.values)
    k4 = field.grid.wavenumbers**4
    return float(np.sqrt(np.dot(k4, np.abs(spec) ** 2) * field.grid.dt / field.grid.n))


def make_gaussian(grid: Grid, amplitude: float, width: float) -> ComplexField:
    if not width > 0:
        raise ValueError(f"invalid width: must be > 0, got {width}")
    values = amplitude * np.exp(-grid.t**2 / (2.0 * width**2))
    return ComplexField(grid, values.astype(np.complex128), 0.0)


def edge_mask(grid: Grid, fraction: float = EDGE_FRACTION) -> np.ndarray:
    m = max(1, int(np.ceil(fraction * grid.n)))
    mask = np.zeros(grid.n, dtype=bool)
    mask[:m] = True
    mask[-m:] = True
    return mask


def edge_level(field: ComplexField, fraction: float = EDGE_FRACTION) -> float:
    """Largest ``|u|`` over the outer ``fraction`` of samples."""
    return float(np.max(np.abs(field.values[edge_mask(field.grid, fraction)])))


def is_edge_decaying(field: ComplexField, tol: float = 1e-12, relative: bool = False,
                     fraction: float = EDGE_FRACTION) -> bool:
    """True when ``|u|`` stays below ``tol`` on the outer band of the box.

    With ``relative=True`` the threshold is ``tol * max|u|``.
    """
    level = edge_level(field, fraction)
    if relative:
        peak = sup_norm(field)
        return peak == 0.0 or level <= tol * peak
    return level <= tol


def write_field_csv(field: ComplexField, path) -> None:
    """Write a snapshot as CSV with header ``t,re,im`` in grid order."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "re", "im"])
        for t, v in zip(field.grid.t, field.values):
            writer.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag))])


def read_field_csv(path, z: float = 0.0) -> ComplexField:
    """Read a ``t,re,im`` snapshot and rebuild its grid.

    The samples must be uniform and in grid order; ``t_max`` is recovered as
    ``t_min + n*dt``.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "re", "im"]:
            raise ValueError(f"{path}: expected header 't,re,im', got {header}")
        rows = [[float(x) for x in row] for row in reader if row]
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ValueError(f"{path}: expected three columns")
    t = data[:, 0]
    n = t.size
    if n < 2:
        raise ValueError(f"{path}: too few samples")
    dt = (t[-1] - t[0]) / (n - 1)
    if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=1e-12 * max(1.0, abs(dt))):
        raise ValueError(f"{path}: samples are not uniformly spaced")
    grid = make_grid(t[0], t[0] + n * dt, n)
    return ComplexField(grid, data[:, 1] + 1j * data[:, 2], z)
