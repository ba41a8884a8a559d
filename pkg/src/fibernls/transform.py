"""Coordinate map between the integrable model and the cubic NLSE.

    T = e^{-c2 z} t,   Z = (1 - e^{-2 c2 z}) / (2 c2),
    v(z, t) = exp(i c2 t^2 / 4 - c2 z / 2) Q(Z, T).

The inverse is ``t = T / sqrt(1 - 2 c2 Z)``, ``z = -ln(1 - 2 c2 Z) / (2 c2)``,
``Q(Z, T) = exp(-i c2 t^2 / 4 + c2 z / 2) v(z, t)``. Both directions preserve
the L2 norm, and the focusing sign is kept: ``rho = c1``.

Sampled fields are evaluated off-grid by trigonometric interpolation
(direct Fourier sums, O(n) per point). Points that fall outside the source
box are taken as zero. That is only legitimate for fields that have decayed
at the box edges, so anything else raises :class:`OutOfBox`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.interpolate import CubicSpline

from . import kernels
from .field import ComplexField, Grid, edge_level, sup_norm, weighted_norm_t2

EDGE_TOL = 1e-8


class OutOfBox(ValueError):
    """Off-grid evaluation would need a field outside its sampled box."""

    def __init__(self, message: str, max_z: float = float("nan")):
        super().__init__(message)
        self.max_z = max_z


@dataclass(frozen=True)
class MapParams:
    c2: float

    def __post_init__(self):
        if not (math.isfinite(self.c2) and self.c2 > 0):
            raise ValueError(f"c2 must be > 0, got {self.c2}")


def z_to_Z(z, c2: float):
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0):
        raise ValueError("z must be >= 0")
    out = -np.expm1(-2.0 * c2 * z_arr) / (2.0 * c2)
    return float(out) if out.ndim == 0 else out


def Z_to_z(Z, c2: float):
    Z_arr = np.asarray(Z, dtype=float)
    if np.any(Z_arr < 0):
        raise ValueError("Z must be >= 0")
    if np.any(2.0 * c2 * Z_arr >= 1.0):
        raise ValueError(f"Z must stay below the horizon 1/(2 c2) = {0.5 / c2}")
    out = -np.log1p(-2.0 * c2 * Z_arr) / (2.0 * c2)
    return float(out) if out.ndim == 0 else out


def Z_horizon(c2: float) -> float:
    return 0.5 / c2


# --- off-grid evaluation -----------------------------------------------------

def trig_interpolate(field: ComplexField, points) -> np.ndarray:
    """Evaluate the band-limited periodic interpolant of ``field`` at ``points``.

    The Nyquist coefficient is split evenly between the +/- Nyquist
    wavenumbers so the interpolant is the symmetric one.
    """
    grid = field.grid
    n = grid.n
    spec = np.fft.fft(field.values) / n
    half = n // 2
    coeffs = np.empty(n + 1, dtype=np.complex128)
    coeffs[0] = 0.5 * spec[half]
    coeffs[1:half] = spec[half + 1:]
    coeffs[half:n] = spec[:half]
    coeffs[n] = 0.5 * spec[half]
    dk = 2.0 * np.pi / grid.length
    x = np.ascontiguousarray(np.asarray(points, dtype=float) - grid.t_min)
    return kernels.trig_sum(coeffs, -half * dk, dk, x)


def spline_interpolate(field: ComplexField, points) -> np.ndarray:
    """Cubic-spline alternative to :func:`trig_interpolate` (periodic ends)."""
    grid = field.grid
    t = np.append(grid.t, grid.t_max)
    vals = np.append(field.values, field.values[0])
    re = CubicSpline(t, vals.real, bc_type="periodic")
    im = CubicSpline(t, vals.imag, bc_type="periodic")
    x = grid.t_min + np.mod(np.asarray(points, dtype=float) - grid.t_min, grid.length)
    return re(x) + 1j * im(x)


_INTERPOLATORS = {"trig": trig_interpolate, "spline": spline_interpolate}


def sample_off_grid(field: ComplexField, points, method: str = "trig",
                    edge_tol: float = EDGE_TOL) -> np.ndarray:
    """Evaluate ``field`` at arbitrary ``points``; zero outside its box.

    Raises :class:`OutOfBox` if some points leave the box while the field
    has not decayed there (relative edge level above ``edge_tol``).
    """
    points = np.asarray(points, dtype=float)
    inside = field.grid.contains(points)
    out = np.zeros(points.shape, dtype=np.complex128)
    if not np.all(inside):
        peak = sup_norm(field)
        if peak > 0 and edge_level(field) > edge_tol * peak:
            raise OutOfBox("scaled sample points leave the box of a field that has not decayed "
                           f"at its edges (edge/peak = {edge_level(field) / peak:.3g})")
    if np.any(inside):
        out[inside] = _INTERPOLATORS[method](field, points[inside])
    return out


# --- the maps ----------------------------------------------------------------

SourceLike = Union[ComplexField, Callable[[float, np.ndarray], np.ndarray]]


def forward_map(source: SourceLike, z: float, grid: Grid, params: MapParams,
                method: str = "trig") -> ComplexField:
    """Build ``v(z, .)`` on ``grid`` from the cubic-NLSE solution ``Q(Z(z), .)``.

    ``source`` is either an evaluator ``Q(Z, T_array)`` or a sampled field that
    must sit at coordinate ``Z(z)``.
    """
    c2 = params.c2
    Z = z_to_Z(z, c2)
    T = math.exp(-c2 * z) * grid.t
    if isinstance(source, ComplexField):
        if not math.isclose(source.z, Z, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"sampled Q sits at Z={source.z}, expected Z(z)={Z}")
        q = sample_off_grid(source, T, method)
    else:
        q = np.asarray(source(Z, T), dtype=np.complex128)
    gauge = np.exp(1j * 0.25 * c2 * grid.t2 - 0.5 * c2 * z)
    return ComplexField(grid, gauge * q, z)


def inverse_map(v: ComplexField, params: MapParams, grid: Grid = None,
                method: str = "trig") -> ComplexField:
    """Build ``Q(Z(z), .)`` from ``v(z, .)``; the result carries coordinate ``Z(z)``.

    The source points ``t = e^{c2 z} T`` spread out with ``z``. Points beyond
    ``v``'s box count as zero, so ``v`` must have decayed at its edges. When it
    has not, :class:`OutOfBox` reports the largest ``z`` for which every
    needed point stays inside.
    """
    c2 = params.c2
    z = v.z
    grid = v.grid if grid is None else grid
    Z = z_to_Z(z, c2)
    stretch = math.exp(c2 * z)
    t = stretch * grid.t
    try:
        vals = sample_off_grid(v, t, method)
    except OutOfBox as exc:
        reach = max(abs(grid.t_min), abs(grid.t_max))
        box = min(abs(v.grid.t_min), abs(v.grid.t_max))
        max_z = math.log(box / reach) / c2 if reach > 0 and box >= reach else 0.0
        raise OutOfBox(f"{exc}; without edge decay the largest admissible z is {max_z:.6g}",
                       max_z) from None
    gauge = np.exp(-1j * 0.25 * c2 * t**2 + 0.5 * c2 * z)
    return ComplexField(grid, gauge * vals, Z)


# --- soliton -------------------------------------------------------------------

def soliton_values(a: float, rho: int, Z, T) -> np.ndarray:
    """``a sqrt(2/rho) sech(a T) exp(i a^2 Z)``, the bright soliton of the cubic NLSE."""
    if not a > 0:
        raise ValueError(f"soliton amplitude must be > 0, got {a}")
    if rho != 1:
        raise ValueError("bright solitons need rho = +1 (defocusing has none)")
    x = np.abs(a * np.asarray(T, dtype=float))
    sech = 2.0 * np.exp(-x) / (1.0 + np.exp(-2.0 * x))
    return a * math.sqrt(2.0) * sech * np.exp(1j * a * a * Z)


def soliton_evaluator(a: float, rho: int = 1) -> Callable[[float, np.ndarray], np.ndarray]:
    soliton_values(a, rho, 0.0, 0.0)  # validates
    return lambda Z, T: soliton_values(a, rho, Z, T)


def soliton(a: float, rho: int, Z: float, grid: Grid) -> ComplexField:
    return ComplexField(grid, soliton_values(a, rho, Z, grid.t), Z)


def transformed_soliton(a: float, c2: float, z: float, grid: Grid) -> ComplexField:
    """Exact solution of the integrable model (``c1 = +1``) built from the soliton."""
    return forward_map(soliton_evaluator(a, 1), z, grid, MapParams(c2))


def lemma_shift_check(v: ComplexField, params: MapParams, method: str = "trig") -> tuple:
    """``(||t^2 v(z)||, e^{2 c2 z} ||T^2 Q(Z(z))||)``; equal for exact data."""
    lhs = weighted_norm_t2(v)
    if lhs == 0.0 and sup_norm(v) == 0.0:
        return 0.0, 0.0
    q = inverse_map(v, params, method=method)
    rhs = math.exp(2.0 * params.c2 * v.z) * weighted_norm_t2(q)
    return lhs, rhs
