"""Fiber parameters, the dimensionless models, and the Painleve coefficient check.

Normalization
-------------
The lossy fiber equation (after removing the ``e^{-alpha z/2}`` amplitude
decay) reads ``i u_z = -(beta2/2) u_tt + gamma e^{-alpha z} |u|^2 u``.
With ``t = T0*tau``, ``z = L*zeta``, ``u = A*psi`` and

    L = 2 T0^2 / |beta2|   (twice the dispersion length)
    A = (gamma L)^{-1/2}

it becomes ``i psi_zeta + sgn(beta2) psi_tautau - e^{-c2 zeta} |psi|^2 psi = 0``
with ``c2 = alpha*L``. For ``beta2 > 0`` this is the normalized model with
``c1 = -1``. For ``beta2 < 0`` the complex conjugate ``conj(psi)`` satisfies
the normalized model with ``c1 = +1``; :meth:`Normalization.to_dimensionless`
applies that conjugation. The normalized peak amplitude of a pulse with peak
power ``P0`` is ``sqrt(gamma P0 L) = sqrt(2 L_D / L_NL)``.

Painleve check
--------------
For ``i v_z + f v_tt + g |v|^2 v + (V0 + V1 t + V2 t^2) v + i h v = 0`` the
coefficients pass the WTC test when :func:`painleve_residual` vanishes. With
``h = 0`` the relation can be solved for ``V2`` (:func:`v2_from_fg`).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline


class InvalidParams(ValueError):
    pass


class SingularCoefficient(ValueError):
    pass


class InsufficientGrid(ValueError):
    pass


class QuadratureFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class FiberParams:
    """Dimensional fiber and pulse parameters (any consistent unit system)."""

    alpha: float
    beta2: float
    gamma: float
    T0: float
    P0: float

    def __post_init__(self):
        bad = [name for name in ("alpha", "gamma", "T0", "P0")
               if not (math.isfinite(getattr(self, name)) and getattr(self, name) > 0)]
        if not math.isfinite(self.beta2) or self.beta2 == 0:
            bad.append("beta2")
        if bad:
            raise InvalidParams(f"invalid fiber parameters: {', '.join(bad)}")

    @property
    def dispersion_length(self) -> float:
        return self.T0**2 / abs(self.beta2)

    @property
    def nonlinear_length(self) -> float:
        return 1.0 / (self.gamma * self.P0)


@dataclass(frozen=True)
class DimensionlessParams:
    """``c1`` = +1 focusing / -1 defocusing, loss rate ``c2 > 0``, cubic sign ``rho``.

    ``rho`` defaults to ``c1``, which is the sign the coordinate map carries
    the integrable model onto.
    """

    c1: int = 1
    c2: float = 1.0
    rho: Optional[int] = None

    def __post_init__(self):
        if self.c1 not in (1, -1):
            raise InvalidParams(f"c1 must be +1 or -1, got {self.c1}")
        if not (math.isfinite(self.c2) and self.c2 > 0):
            raise InvalidParams(f"c2 must be > 0, got {self.c2}")
        rho = self.c1 if self.rho is None else self.rho
        if rho not in (1, -1):
            raise InvalidParams(f"rho must be +1 or -1, got {self.rho}")
        object.__setattr__(self, "rho", int(rho))
        object.__setattr__(self, "c1", int(self.c1))
        object.__setattr__(self, "c2", float(self.c2))


@dataclass(frozen=True)
class Normalization:
    params: DimensionlessParams
    length_scale: float
    time_scale: float
    amplitude_scale: float
    peak_amplitude: float
    regime_ratio: float
    regime_ok: bool

    @property
    def conjugated(self) -> bool:
        return self.params.c1 == 1

    def to_dimensionless(self, u) -> np.ndarray:
        psi = np.asarray(u, dtype=np.complex128) / self.amplitude_scale
        return np.conj(psi) if self.conjugated else psi

    def to_physical(self, psi) -> np.ndarray:
        psi = np.asarray(psi, dtype=np.complex128)
        if self.conjugated:
            psi = np.conj(psi)
        return psi * self.amplitude_scale

    def dimensional(self) -> dict:
        """Rebuild ``alpha``, ``beta2`` and ``gamma*P0`` from the scales."""
        L = self.length_scale
        return {
            "alpha": self.params.c2 / L,
            "beta2": -self.params.c1 * 2.0 * self.time_scale**2 / L,
            "gamma_P0": self.peak_amplitude**2 / L,
        }


def normalize(params: FiberParams, regime_factor: float = 10.0) -> Normalization:
    """Map fiber parameters to ``(c1, c2)`` plus the scales for round-tripping.

    The ``L_D ~ L_NL`` regime is checked but only reported.
    """
    if not isinstance(params, FiberParams):
        raise InvalidParams("expected FiberParams")
    L = 2.0 * params.T0**2 / abs(params.beta2)
    c1 = 1 if params.beta2 < 0 else -1
    ratio = params.dispersion_length / params.nonlinear_length
    return Normalization(
        params=DimensionlessParams(c1=c1, c2=params.alpha * L),
        length_scale=L,
        time_scale=params.T0,
        amplitude_scale=1.0 / math.sqrt(params.gamma * L),
        peak_amplitude=math.sqrt(params.gamma * params.P0 * L),
        regime_ratio=ratio,
        regime_ok=(1.0 / regime_factor) <= ratio <= regime_factor,
    )


# --- coefficient functions -------------------------------------------------

@dataclass
class Coefficient:
    """A scalar function of z, optionally with closed-form derivatives.

    ``derivs[k]`` evaluates the (k+1)-th derivative; ``antiderivative``
    evaluates ``int_0^z``. Either may be missing, in which case finite
    differences or quadrature take over.
    """

    func: Callable[[np.ndarray], np.ndarray]
    derivs: tuple = ()
    antiderivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = "callable"

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(np.asarray(self.func(z), dtype=float), z.shape).copy()

    def derivative(self, z, order: int):
        if order == 0:
            return self(z)
        if order <= len(self.derivs):
            z = np.asarray(z, dtype=float)
            return np.broadcast_to(np.asarray(self.derivs[order - 1](z), dtype=float), z.shape).copy()
        return None

    @classmethod
    def const(cls, value: float) -> "Coefficient":
        value = float(value)
        zero = lambda z: np.zeros_like(z)  # noqa: E731
        return cls(lambda z: np.full_like(z, value), (zero, zero),
                   lambda z: value * z, f"const({value:g})")

    @classmethod
    def exp(cls, scale: float, rate: float) -> "Coefficient":
        """``scale * exp(rate * z)``."""
        c, r = float(scale), float(rate)
        if r == 0.0:
            anti = lambda z: c * z  # noqa: E731
        else:
            anti = lambda z: c * np.expm1(r * z) / r  # noqa: E731
        return cls(lambda z: c * np.exp(r * z),
                   (lambda z: c * r * np.exp(r * z), lambda z: c * r * r * np.exp(r * z)),
                   anti, f"exp({c:g}, {r:g})")

    @classmethod
    def samples(cls, z, values) -> "Coefficient":
        z = np.asarray(z, dtype=float)
        values = np.asarray(values, dtype=float)
        if z.ndim != 1 or z.shape != values.shape or z.size < 2:
            raise ValueError("samples need matching 1-D z and value arrays")
        order = np.argsort(z)
        spline = CubicSpline(z[order], values[order])
        coef = cls(lambda x: spline(x), (), None, f"samples[{z.size}]")
        coef.sample_z = z[order]
        return coef


ZERO = Coefficient.const(0.0)


@dataclass
class CoefficientFamily:
    f: Coefficient
    g: Coefficient
    h: Coefficient = dc_field(default_factory=lambda: Coefficient.const(0.0))
    v0: Coefficient = dc_field(default_factory=lambda: Coefficient.const(0.0))
    v1: Coefficient = dc_field(default_factory=lambda: Coefficient.const(0.0))
    v2: Optional[Coefficient] = None


def fiber_family(alpha: float, beta2: float, gamma: float) -> CoefficientFamily:
    """``f = beta2/2``, ``g = -gamma e^{-alpha z}``, ``V2 = alpha^2/(2 beta2)``."""
    return CoefficientFamily(
        f=Coefficient.const(beta2 / 2.0),
        g=Coefficient.exp(-gamma, -alpha),
        v2=Coefficient.const(alpha**2 / (2.0 * beta2)),
    )


# --- finite differences ----------------------------------------------------

def _fd_weights(offsets: np.ndarray, order: int) -> np.ndarray:
    """Weights w with sum(w * f(x0 + offsets)) ~ f^(order)(x0)."""
    m = offsets.size
    A = np.vander(offsets, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(A, rhs)


def fd_derivative(values: np.ndarray, z: np.ndarray, order: int) -> np.ndarray:
    """Fourth-order finite-difference derivative on a (possibly non-uniform) grid.

    Five-point centered stencils in the interior; one-sided stencils at the
    edges, widened to six points for the second derivative so the order is
    kept.
    """
    z = np.asarray(z, dtype=float)
    values = np.asarray(values, dtype=float)
    n = z.size
    if n < 5 or (order == 2 and n < 6):
        raise InsufficientGrid(f"need at least {5 if order == 1 else 6} z samples, got {n}")
    out = np.empty(n)
    for i in range(n):
        if 2 <= i <= n - 3:
            idx = np.arange(i - 2, i + 3)
        else:
            width = 5 if order == 1 else 6
            start = 0 if i < 2 else n - width
            idx = np.arange(start, start + width)
        scale = float(np.ptp(z[idx])) or 1.0
        w = _fd_weights((z[idx] - z[i]) / scale, order) / scale**order
        out[i] = np.dot(w, values[idx])
    return out


def _coefficient_derivs(coef: Coefficient, z: np.ndarray, closed_form: bool):
    c = coef(z)
    out = [c]
    for order in (1, 2):
        d = coef.derivative(z, order) if closed_form else None
        if d is None:
            d = fd_derivative(c, z, order)
        out.append(d)
    return out


def _check_grid(z_grid) -> np.ndarray:
    z = np.asarray(z_grid, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise InsufficientGrid("z_grid must be a non-empty 1-D array")
    if z.size > 1 and np.any(np.diff(z) <= 0):
        raise ValueError("z_grid must be strictly increasing")
    return z


def v2_from_fg(family: CoefficientFamily, z_grid, closed_form: bool = True) -> np.ndarray:
    """Potential curvature ``V2(z)`` that makes ``(f, g, h=0)`` Painleve integrable.

    Uses closed-form derivatives when the coefficients supply them and
    ``closed_form`` is true, otherwise fourth-order finite differences on
    ``z_grid``.
    """
    z = _check_grid(z_grid)
    if not closed_form and z.size < 5:
        raise InsufficientGrid("finite differences need at least 5 z samples")
    h = family.h(z)
    if np.any(h != 0.0):
        raise ValueError("v2_from_fg requires h == 0; remove the loss with gauge_remove_loss first")
    f, fz, fzz = _coefficient_derivs(family.f, z, closed_form)
    g, gz, gzz = _coefficient_derivs(family.g, z, closed_form)
    if np.any(f == 0.0) or np.any(g == 0.0):
        raise SingularCoefficient("f and g must not vanish on the z grid")
    num = (g * g * f * fzz - f * f * g * gzz + 2.0 * f * f * gz * gz
           - g * g * fz * fz - g * f * gz * fz)
    return num / (4.0 * f**3 * g * g)


def painleve_residual(family: CoefficientFamily, z_grid, closed_form: bool = True) -> np.ndarray:
    """Left side of the WTC compatibility condition, pointwise on ``z_grid``."""
    z = _check_grid(z_grid)
    if family.v2 is None:
        raise ValueError("family.v2 must be supplied")
    f, fz, fzz = _coefficient_derivs(family.f, z, closed_form)
    g, gz, gzz = _coefficient_derivs(family.g, z, closed_form)
    h = family.h(z)
    hz = family.h.derivative(z, 1) if closed_form else None
    if hz is None:
        hz = fd_derivative(h, z, 1)
    if np.any(f == 0.0) or np.any(g == 0.0):
        raise SingularCoefficient("f and g must not vanish on the z grid")
    v2 = family.v2(z)
    return ((4 * f * f * g * gz - 2 * f * fz * g * g) * h
            - 4 * f * f * g * g * h * h
            - 2 * f * f * g * g * hz
            - g * g * f * fzz
            + f * f * g * gzz
            - 2 * f * f * gz * gz
            + fz * fz * g * g
            + fz * g * f * gz
            + 4 * v2 * f**3 * g * g)


def gauge_remove_loss(h, z: float) -> float:
    """Amplitude factor ``exp(-int_0^z h)`` that strips a loss/gain term.

    ``h`` is a :class:`Coefficient` (closed-form integral used if known) or
    any scalar callable (adaptive quadrature).
    """
    anti = getattr(h, "antiderivative", None)
    if anti is not None:
        return float(np.exp(-(anti(np.asarray(z, dtype=float)) - anti(np.asarray(0.0)))))
    def integrand(s):
        try:
            val = float(h(s))
        except (ZeroDivisionError, OverflowError) as exc:
            raise QuadratureFailure(f"h not evaluable at z={s}: {exc}") from exc
        if not math.isfinite(val):
            raise QuadratureFailure(f"h is not finite at z={s}")
        return val

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(integrand, 0.0, z, epsabs=1e-13, epsrel=1e-12, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(str(exc)) from exc
    if not np.isfinite(val):
        raise QuadratureFailure("non-finite integral")
    return math.exp(-val)


# --- config ------------------------------------------------------------------

def read_samples_csv(path) -> tuple:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["z", "value"]:
            raise ValueError(f"{path}: expected header 'z,value'")
        rows = [[float(x) for x in row] for row in reader if row]
    data = np.asarray(rows, dtype=float).reshape(-1, 2)
    return data[:, 0], data[:, 1]


def coefficient_from_config(spec, base_dir=".") -> Coefficient:
    """Build a coefficient from ``{kind: const|exp|samples, ...}``."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("coefficient spec must be a mapping with a 'kind' key")
    kind = spec["kind"]
    allowed = {"const": {"kind", "value"}, "exp": {"kind", "scale", "rate"},
               "samples": {"kind", "path"}}
    if kind not in allowed:
        raise ValueError(f"unknown coefficient kind {kind!r}")
    extra = set(spec) - allowed[kind]
    missing = allowed[kind] - set(spec)
    if extra:
        raise ValueError(f"unknown keys {sorted(extra)}")
    if missing:
        raise ValueError(f"missing keys {sorted(missing)}")
    if kind == "const":
        return Coefficient.const(float(spec["value"]))
    if kind == "exp":
        return Coefficient.exp(float(spec["scale"]), float(spec["rate"]))
    path = Path(spec["path"])
    if not path.is_absolute():
        path = Path(base_dir) / path
    return Coefficient.samples(*read_samples_csv(path))


def family_from_config(section: dict, base_dir=".") -> CoefficientFamily:
    kw = {}
    for key in ("f", "g", "h", "v0", "v1", "v2"):
        if key in section:
            kw[key] = coefficient_from_config(section[key], base_dir)
    if "f" not in kw or "g" not in kw:
        raise ValueError("coefficient family needs at least 'f' and 'g'")
    return CoefficientFamily(**kw)
