"""Closed-form a priori bounds for the distance between the lossy and integrable models.

Notation: ``A(delta) = (c2/2 + 1) delta + 1`` and
``E(Z) = (8/Ct) (e^{Ct Z/2} - 1)``, where ``Ct`` is the Gronwall constant of
the ``||T Q_T||`` estimate. Then

    ||T Q_T(Z)||    <= A e^{Ct Z/2} - 1                          (h_bound)
    ||T^2 Q(Z)||    <= eta(Z) = delta + A E(Z) - 4 Z             (f_bound)
    ||t^2 v(z)||    <= e^{2 c2 z} eta(Z(z))                      (g_bound)
    ||v(z) - u(z)|| <= (c2^2/4) eta(Z(z)) z e^{(2 c2 + C) z}     (distance_bound)

and the admissible initial size is
``delta < (G(L, eps) - H(L)) / (1 + (c2/2 + 1) E(Z(L)))`` with
``G = 4 eps e^{-(2c2+C) z} / (c2^2 z)`` and ``H = E(Z) - 4 Z``.

The ``(c2^2/4)`` prefactor follows the Duhamel estimate. The variant with a
bare ``c2/4`` prefactor is kept as :attr:`Variant.PAPER_LITERAL`.

``C`` is the Lipschitz constant of ``f(zeta) = |zeta|^2 zeta`` on
``{|zeta|^2 + |xi|^2 <= K}``. Writing
``f(zeta) - f(xi) = |zeta|^2 (zeta - xi) + xi (|zeta| - |xi|)(|zeta| + |xi|)``
gives ``|f(zeta) - f(xi)| <= (|zeta|^2 + |zeta||xi| + |xi|^2)|zeta - xi|
<= (3/2)(|zeta|^2 + |xi|^2)|zeta - xi|``, so ``C = 3K/2``.

``E`` has a removable singularity at ``Ct = 0`` (limit ``4 Z``); the series
form is used there.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .field import dtt_norm
from .transform import z_to_Z

LIPSCHITZ_FACTOR = 1.5
DEFAULT_Z_MIN = 1e-6
DEFAULT_GRID_POINTS = 512


class Variant(str, enum.Enum):
    SQUARED = "squared"
    PAPER_LITERAL = "paper_literal"


class EmptyTrajectory(ValueError):
    pass


class BracketFailure(RuntimeError):
    pass


class LTooLarge(ValueError):
    """``G(L, eps) <= H(L)``: no positive delta works at this L."""


@dataclass(frozen=True)
class BoundConstants:
    K: float
    C_tilde: float
    c2: float
    delta: float = 0.0
    C: Optional[float] = None

    def __post_init__(self):
        for name in ("K", "C_tilde", "delta"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {val}")
        if not (math.isfinite(self.c2) and self.c2 > 0):
            raise ValueError(f"c2 must be > 0, got {self.c2}")
        expected = LIPSCHITZ_FACTOR * self.K
        if self.C is None:
            object.__setattr__(self, "C", expected)
        elif not math.isclose(self.C, expected, rel_tol=1e-12, abs_tol=0.0):
            raise ValueError(f"C must equal 1.5*K = {expected}, got {self.C}")

    def with_delta(self, delta: float) -> "BoundConstants":
        return BoundConstants(self.K, self.C_tilde, self.c2, delta)

    def as_dict(self) -> dict:
        return {"K": self.K, "C": self.C, "C_tilde": self.C_tilde, "c2": self.c2,
                "delta": self.delta}


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _phi1(x):
    """``expm1(x)/x`` with the value 1 at 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-5
    safe = np.where(small, 1.0, x)
    series = 1.0 + x / 2.0 + x * x / 6.0
    return np.where(small, series, np.expm1(safe) / safe)


def _phi2(x):
    """``(expm1(x) - x)/x`` with the value 0 at 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    safe = np.where(small, 1.0, x)
    series = x / 2.0 + x * x / 6.0 + x**3 / 24.0 + x**4 / 120.0
    return np.where(small, series, (np.expm1(safe) - safe) / safe)


def growth(Z, C_tilde: float):
    """``(8/Ct)(e^{Ct Z/2} - 1)``, continuous at ``Ct = 0``."""
    Z = np.asarray(Z, dtype=float)
    return 4.0 * Z * _phi1(0.5 * C_tilde * Z)


def growth_minus_linear(Z, C_tilde: float):
    """``(8/Ct)(e^{Ct Z/2} - 1) - 4 Z`` without cancellation."""
    Z = np.asarray(Z, dtype=float)
    return 4.0 * Z * _phi2(0.5 * C_tilde * Z)


def _amp(consts: BoundConstants, delta: float) -> float:
    return (0.5 * consts.c2 + 1.0) * delta + 1.0


def h_bound(Z, consts: BoundConstants):
    """Upper bound for ``||T Q_T(Z)||``."""
    Z = np.asarray(Z, dtype=float)
    A = _amp(consts, consts.delta)
    # A e^{x} - 1 = (A - 1) e^x + expm1(x)
    x = 0.5 * consts.C_tilde * Z
    return _out((A - 1.0) * np.exp(x) + np.expm1(x))


def eta(Z, delta: float, consts: BoundConstants):
    Z = np.asarray(Z, dtype=float)
    slope = 0.5 * consts.c2 + 1.0
    return _out(delta + slope * delta * growth(Z, consts.C_tilde)
                + growth_minus_linear(Z, consts.C_tilde))


def f_bound(Z, consts: BoundConstants):
    """Upper bound for ``||T^2 Q(Z)||``."""
    return eta(Z, consts.delta, consts)


def g_bound(z, consts: BoundConstants):
    """Upper bound for ``||t^2 v(z)||``."""
    z = np.asarray(z, dtype=float)
    return _out(np.exp(2.0 * consts.c2 * z) * eta(z_to_Z(z, consts.c2), consts.delta, consts))


def _prefactor(consts: BoundConstants, variant) -> float:
    variant = Variant(variant)
    return 0.25 * consts.c2**2 if variant is Variant.SQUARED else 0.25 * consts.c2


def distance_bound(z, consts: BoundConstants, variant=Variant.SQUARED):
    """Upper bound for ``||v(z) - u(z)||_{L2}``."""
    z = np.asarray(z, dtype=float)
    e = np.asarray(eta(z_to_Z(z, consts.c2), consts.delta, consts))
    return _out(_prefactor(consts, variant) * e * z * np.exp((2.0 * consts.c2 + consts.C) * z))


def G_func(z, epsilon: float, consts: BoundConstants, variant=Variant.SQUARED):
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("G is singular at z <= 0")
    return _out(epsilon * np.exp(-(2.0 * consts.c2 + consts.C) * z)
                / (_prefactor(consts, variant) * z))


def H_func(z, consts: BoundConstants):
    z = np.asarray(z, dtype=float)
    return _out(growth_minus_linear(z_to_Z(z, consts.c2), consts.C_tilde))


def H_limit(consts: BoundConstants) -> float:
    """``lim_{z->inf} H = (8/Ct)(e^{Ct/(4 c2)} - 1) - 2/c2``."""
    return float(growth_minus_linear(0.5 / consts.c2, consts.C_tilde))


def default_horizon(consts: BoundConstants) -> float:
    return 10.0 / consts.c2


def z_grid(consts: BoundConstants, points: int = DEFAULT_GRID_POINTS,
           z_min: float = DEFAULT_Z_MIN, horizon: Optional[float] = None) -> np.ndarray:
    """Geometric grid resolving both the ``z -> 0`` pole of G and the saturation of H."""
    horizon = default_horizon(consts) if horizon is None else horizon
    return np.geomspace(z_min, horizon, points)


@dataclass(frozen=True)
class LResult:
    L: float
    saturated: bool
    residual: float
    iterations: int


def find_L(epsilon: float, consts: BoundConstants, variant=Variant.SQUARED,
           horizon: Optional[float] = None, tol: float = 1e-10, full_output: bool = False):
    """Root ``L(eps)`` of ``G(., eps) - H``.

    ``G - H`` decreases strictly from ``+inf``, so bisection on a bracket
    is enough. The returned point sits on the positive side of the root.
    If ``G - H`` is still positive at the horizon, the horizon is returned
    with ``saturated=True``.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    horizon = default_horizon(consts) if horizon is None else float(horizon)

    def gap(z):
        return G_func(z, epsilon, consts, variant) - H_func(z, consts)

    g_hi = gap(horizon)
    if g_hi > 0:
        res = LResult(horizon, True, g_hi, 0)
        return res if full_output else res.L
    lo = min(DEFAULT_Z_MIN, 0.5 * horizon)
    while gap(lo) <= 0:
        lo *= 0.1
        if lo < 1e-300:
            raise BracketFailure(f"G - H not positive near z=0 (epsilon={epsilon}, {consts})")
    hi = min(2.0 * lo, horizon)
    while gap(hi) > 0:
        lo, hi = hi, min(2.0 * hi, horizon)
    it = 0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
        it += 1
        if it > 400:
            raise BracketFailure("bisection did not converge")
    res = LResult(lo, False, gap(lo), it)
    return res if full_output else res.L


def delta_max(L: float, epsilon: float, consts: BoundConstants, variant=Variant.SQUARED) -> float:
    """Largest admissible initial moment size for the horizon ``L``."""
    if not L > 0:
        raise ValueError("L must be > 0")
    num = G_func(L, epsilon, consts, variant) - H_func(L, consts)
    if num <= 0:
        raise LTooLarge(f"G(L, eps) - H(L) = {num:.3g} <= 0 at L={L}")
    denom = 1.0 + (0.5 * consts.c2 + 1.0) * float(growth(z_to_Z(L, consts.c2), consts.C_tilde))
    return float(num / denom)


def reverse_epsilon(L_bar: float, consts: BoundConstants, variant=Variant.SQUARED) -> float:
    """Smallest ``eps`` with ``G(L_bar, eps) >= H(L_bar)`` (G is linear in eps)."""
    return float(H_func(L_bar, consts) / G_func(L_bar, 1.0, consts, variant))


def guaranteed_epsilon(L_bar: float, consts: BoundConstants, variant=Variant.SQUARED) -> float:
    """Distance guaranteed on ``[0, L_bar]`` for the initial size ``consts.delta``."""
    return float(distance_bound(L_bar, consts, variant))


def _sup_dtt(traj) -> float:
    if getattr(traj, "sup_dtt", None) is not None:
        return float(traj.sup_dtt)
    return max(dtt_norm(s) for s in traj.snapshots)


def _sup_abs2(traj) -> float:
    snap = max(float(np.max(np.abs(s.values) ** 2)) for s in traj.snapshots)
    return max(snap, float(getattr(traj, "sup_abs2", 0.0)))


def estimate_constants(u_traj, v_traj, Q_traj, c2: float, delta: float) -> BoundConstants:
    """Read ``K`` and ``Ct`` off simulated trajectories.

    ``K = sup|u|^2 + sup|v|^2`` (over all steps), ``C = 3K/2`` and
    ``Ct = max(4 sup ||Q_TT||, 2 sup ||Q||_inf^2)`` over the ``Q`` run, which
    is what makes ``2[2||TW|| ||W_T|| + ||TW||^2 ||Q||_inf^2] <= Ct (sqrt(h) + h)``
    hold with ``W = Q_T``.
    """
    for name, traj in (("u", u_traj), ("v", v_traj), ("Q", Q_traj)):
        if traj is None or len(traj.snapshots) == 0:
            raise EmptyTrajectory(f"{name} trajectory is empty")
    K = _sup_abs2(u_traj) + _sup_abs2(v_traj)
    C_tilde = max(4.0 * _sup_dtt(Q_traj), 2.0 * _sup_abs2(Q_traj))
    return BoundConstants(K=K, C_tilde=C_tilde, c2=c2, delta=delta)


def monotone_violations(values, increasing: bool = True, strict: bool = True) -> int:
    d = np.diff(np.asarray(values, dtype=float))
    if not increasing:
        d = -d
    return int(np.sum(d <= 0) if strict else np.sum(d < 0))
