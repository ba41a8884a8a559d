"""The canonical experiments behind the CLI.

Each ``run_*`` function returns an :class:`ExperimentResult`. It holds the
JSON report, the CSV tables and the plot series. Every verdict in the report
is computed from numbers stored in that same report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np

from .. import bounds as B
from ..field import (ComplexField, is_edge_decaying, l2_norm, make_gaussian, make_grid,
                     read_field_csv, weighted_norm_t2, weighted_norm_t_ut)
from ..models import Coefficient, family_from_config, fiber_family, normalize, painleve_residual, v2_from_fg
from ..solver import ModelKind, SplitStepConfig, evolve, residual
from ..transform import MapParams, inverse_map, soliton, transformed_soliton, z_to_Z
from .config import ConfigError, ExperimentConfig
from .output import TRAJECTORY_COLUMNS

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

SCALE_TARGET = 0.9
PILOT_Z = 0.25
ORDER_RANGE = (1.8, 2.2)


@dataclass
class ExperimentResult:
    name: str
    report: dict
    tables: dict = field(default_factory=dict)       # file name -> (columns, rows)
    plots: dict = field(default_factory=dict)        # file name -> kwargs for line_chart
    trajectories: dict = field(default_factory=dict)  # label -> Trajectory
    exit_code: int = EXIT_OK


# --- shared pieces -----------------------------------------------------------

def build_grid(cfg: ExperimentConfig):
    g = cfg.grid
    return make_grid(g.t_min, g.t_max, g.n)


def initial_datum(cfg: ExperimentConfig, grid, equation: str = "integrable") -> ComplexField:
    ini = cfg.initial
    if ini.kind == "gaussian":
        return make_gaussian(grid, ini.amplitude, ini.width)
    if ini.kind == "soliton":
        if equation == "cubic":
            if cfg.rho != 1:
                raise ConfigError("model.rho", "soliton datum needs rho = +1")
            return soliton(ini.a, 1, 0.0, grid)
        if cfg.model.c1 != 1:
            raise ConfigError("model.c1", "soliton datum needs the focusing case c1 = +1")
        return transformed_soliton(ini.a, cfg.model.c2, 0.0, grid)
    f = read_field_csv(ini.path)
    if not f.grid.same_as(grid) and not (
            f.grid.n == grid.n and math.isclose(f.grid.t_min, grid.t_min, abs_tol=1e-9)
            and math.isclose(f.grid.t_max, grid.t_max, rel_tol=1e-9, abs_tol=1e-9)):
        raise ConfigError("initial.path", "file grid does not match the configured grid")
    return ComplexField(grid, f.values, 0.0)


def moment_size(v0: ComplexField) -> float:
    return max(weighted_norm_t2(v0), weighted_norm_t_ut(v0))


def scale_datum(v0: ComplexField, delta: float) -> tuple:
    """Scale ``v0`` down to ``0.9*delta`` in both moment norms when they reach ``delta``.

    Both norms are homogeneous of degree one, so a single factor does it.
    """
    m = moment_size(v0)
    if m == 0.0 or m < delta:
        return v0, 1.0
    s = SCALE_TARGET * delta / m
    return v0.with_values(v0.values * s), s


def _sample_coordinates(z_end: float, dz: float, every: int) -> np.ndarray:
    n = max(1, int(math.ceil(z_end / (dz * every) - 1e-9)))
    return z_end * np.arange(1, n + 1) / n


def run_three(cfg: ExperimentConfig, v0: ComplexField, z_end: float) -> dict:
    """Evolve u (lossy), v (integrable) from ``v0`` and Q (cubic) from its inverse map.

    Snapshots of u and v share the z-samples; Q is recorded at the matching Z(z).
    """
    c1, c2 = cfg.model.c1, cfg.model.c2
    dz, every = cfg.solver.dz, cfg.solver.snapshot_every
    q0 = inverse_map(v0, MapParams(c2))
    plain = SplitStepConfig(dz)
    tracked = SplitStepConfig(dz, track_sup=True)
    if z_end == 0:
        return {
            "u": evolve(ModelKind.dissipative(c1, c2), v0, 0.0, plain),
            "v": evolve(ModelKind.integrable(c1, c2), v0, 0.0, plain),
            "Q": evolve(ModelKind.cubic(c1), q0, 0.0, tracked),
        }
    zs = _sample_coordinates(z_end, dz, every)
    Zs = z_to_Z(zs, c2)
    return {
        "u": evolve(ModelKind.dissipative(c1, c2), v0, z_end, plain, record_at=zs),
        "v": evolve(ModelKind.integrable(c1, c2), v0, z_end, plain, record_at=zs),
        "Q": evolve(ModelKind.cubic(c1), q0, float(Zs[-1]), tracked, record_at=Zs),
    }


def _dominated(consts: B.BoundConstants, other: B.BoundConstants) -> bool:
    """True when ``consts`` does not exceed ``other`` in K and C_tilde."""
    slack = 1 + 1e-12
    return consts.K <= other.K * slack and consts.C_tilde <= other.C_tilde * slack


def _max_consts(a: B.BoundConstants, b: B.BoundConstants) -> B.BoundConstants:
    return B.BoundConstants(max(a.K, b.K), max(a.C_tilde, b.C_tilde), a.c2, a.delta)


# --- closeness ----------------------------------------------------------------

def run_closeness(cfg: ExperimentConfig) -> ExperimentResult:
    """Evolve all three models from one datum and test every bound at every sample.

    The constants depend on the trajectories, and with ``delta: auto`` the
    datum size depends on the constants. The loop starts from a pilot run and
    repeats until the constants measured on the final run are no larger than
    the ones that fixed ``L`` and ``delta``. The reported bounds use the
    measured constants.
    """
    grid = build_grid(cfg)
    bs = cfg.bounds
    c2 = cfg.model.c2
    if cfg.rho != cfg.model.c1:
        raise ConfigError("model.rho", "closeness requires rho = c1 (the map preserves the sign)")
    raw = initial_datum(cfg, grid)
    variant = bs.variant
    auto_delta = bs.delta == "auto"
    auto_z = cfg.solver.z_end == "auto"

    pilot_z = PILOT_Z / c2 if auto_z else float(cfg.solver.z_end)
    pilot_delta = None if auto_delta else float(bs.delta)
    datum, scale = (raw, 1.0) if pilot_delta is None else scale_datum(raw, pilot_delta)
    runs = run_three(cfg, datum, pilot_z)
    used = B.estimate_constants(runs["u"], runs["v"], runs["Q"], c2, 0.0)
    history = []
    converged = False
    for it in range(bs.max_iterations):
        L_info = B.find_L(bs.epsilon, used, variant, full_output=True)
        z_run = bs.L_fraction * L_info.L if auto_z else float(cfg.solver.z_end)
        if auto_delta:
            if z_run <= 0:
                raise ConfigError("solver.z_end", "auto delta needs z_end > 0")
            delta = SCALE_TARGET * B.delta_max(z_run, bs.epsilon, used, variant)
        else:
            delta = float(bs.delta)
        datum, scale = scale_datum(raw, delta)
        runs = run_three(cfg, datum, z_run)
        measured = B.estimate_constants(runs["u"], runs["v"], runs["Q"], c2, delta)
        history.append({"iteration": it, "K_used": used.K, "C_tilde_used": used.C_tilde,
                        "K_measured": measured.K, "C_tilde_measured": measured.C_tilde,
                        "L_of_epsilon": L_info.L, "z_end": z_run, "delta": delta,
                        "scale": scale})
        if _dominated(measured, used):
            converged = True
            break
        used = _max_consts(used, measured.with_delta(0.0))
    if not converged:
        raise RuntimeError("constants did not settle within bounds.max_iterations")

    consts = measured
    result = _closeness_report(cfg, runs, consts, used, delta, z_run, scale, datum, history)
    return result


def _closeness_report(cfg, runs, consts, used, delta, z_run, scale, datum, history):
    bs = cfg.bounds
    c2 = cfg.model.c2
    u, v, Q = runs["u"], runs["v"], runs["Q"]
    L_info = B.find_L(bs.epsilon, consts, bs.variant, full_output=True)
    try:
        dmax = B.delta_max(z_run, bs.epsilon, consts, bs.variant) if z_run > 0 else None
    except B.LTooLarge:
        dmax = None

    samples = []
    for k in range(len(u.snapshots)):
        z = float(u.z_values[k])
        Z = float(Q.z_values[k])
        us, vs, qs = u.snapshots[k], v.snapshots[k], Q.snapshots[k]
        dist = l2_norm(vs - us)
        t2v = weighted_norm_t2(vs)
        t2q = weighted_norm_t2(qs)
        samples.append({
            "z": z,
            "Z": Z,
            "measured_distance": dist,
            "distance_bound": B.distance_bound(z, consts, B.Variant.SQUARED),
            "distance_bound_paper_literal": B.distance_bound(z, consts, B.Variant.PAPER_LITERAL),
            "measured_tQT": weighted_norm_t_ut(qs),
            "h_bound": B.h_bound(Z, consts),
            "measured_T2Q": t2q,
            "f_bound": B.f_bound(Z, consts),
            "measured_t2v": t2v,
            "g_bound": B.g_bound(z, consts),
            "lemma_rhs": math.exp(2.0 * c2 * z) * t2q,
        })

    checks = (("distance", "measured_distance", "distance_bound"),
              ("tQT", "measured_tQT", "h_bound"),
              ("T2Q", "measured_T2Q", "f_bound"),
              ("t2v", "measured_t2v", "g_bound"))
    violations = []
    for s in samples:
        for name, mkey, bkey in checks:
            if s[mkey] > s[bkey]:
                violations.append({"z": s["z"], "quantity": name, "measured": s[mkey],
                                   "bound": s[bkey]})
    passed = not violations
    etas = [B.eta(s["Z"], delta, consts) for s in samples]
    report = {
        "experiment": "closeness",
        "K": consts.K,
        "C": consts.C,
        "C_tilde": consts.C_tilde,
        "c1": cfg.model.c1,
        "c2": c2,
        "delta": delta,
        "epsilon": bs.epsilon,
        "L_of_epsilon": L_info.L,
        "L_saturated": L_info.saturated,
        "z_end": z_run,
        "delta_max": dmax,
        "delta_admissible": dmax is not None and delta < dmax,
        "variant": bs.variant,
        "datum_scale": scale,
        "datum_t2_norm": weighted_norm_t2(datum),
        "datum_t_ut_norm": weighted_norm_t_ut(datum),
        "constants_used_for_delta": {"K": used.K, "C": used.C, "C_tilde": used.C_tilde},
        "iterations": history,
        "mass_drift": {name: _drift(t) for name, t in runs.items()},
        "edge_decaying_final": {name: is_edge_decaying(t.final, 1e-8, relative=True)
                                for name, t in runs.items()},
        "eta_monotone_violations": B.monotone_violations(etas, strict=False),
        "max_distance": max(s["measured_distance"] for s in samples),
        "max_distance_bound": max(s["distance_bound"] for s in samples),
        "violations": violations,
        "verdict": "pass" if passed else "fail",
        "samples": samples,
    }
    cols = ("z", "Z", "measured_distance", "distance_bound", "distance_bound_paper_literal",
            "measured_tQT", "h_bound", "measured_T2Q", "f_bound", "measured_t2v", "g_bound",
            "lemma_rhs")
    zs = [s["z"] for s in samples]
    plots = {
        "distance.svg": dict(series={"||v-u|| measured": (zs, [s["measured_distance"] for s in samples]),
                                     "distance bound": (zs, [s["distance_bound"] for s in samples])},
                             title="L2 distance vs bound", xlabel="z", ylabel="distance", logy=True),
        "moments.svg": dict(series={"||TQ_T||": (zs, [s["measured_tQT"] for s in samples]),
                                    "h bound": (zs, [s["h_bound"] for s in samples]),
                                    "||T^2Q||": (zs, [s["measured_T2Q"] for s in samples]),
                                    "f bound": (zs, [s["f_bound"] for s in samples]),
                                    "||t^2v||": (zs, [s["measured_t2v"] for s in samples]),
                                    "g bound": (zs, [s["g_bound"] for s in samples])},
                            title="moment norms vs bounds", xlabel="z", ylabel="norm", logy=True),
    }
    return ExperimentResult("closeness", report, {"metrics.csv": (cols, samples)}, plots,
                            dict(runs), EXIT_OK if passed else EXIT_VIOLATION)


def _drift(traj) -> float:
    m0 = traj.l2[0] ** 2
    if m0 == 0:
        return 0.0
    return float(np.max(np.abs(traj.l2**2 - m0)) / m0)


# --- convergence ---------------------------------------------------------------

def run_convergence(cfg: ExperimentConfig, refinements: int = 4) -> ExperimentResult:
    """Cubic model against the analytic soliton at dz, dz/2, dz/4, dz/8."""
    if cfg.initial.kind != "soliton":
        raise ConfigError("initial.kind", "convergence needs the soliton datum")
    if cfg.rho != 1:
        raise ConfigError("model.rho", "convergence needs rho = +1")
    grid = build_grid(cfg)
    a = cfg.initial.a
    z_end = cfg.solver.z_end
    if z_end == "auto":
        raise ConfigError("solver.z_end", "convergence needs a numeric z_end")
    model = ModelKind.cubic(1)
    q0 = soliton(a, 1, 0.0, grid)
    exact = soliton(a, 1, z_end, grid)
    rows = []
    for i in range(refinements):
        dz = cfg.solver.dz / 2**i
        traj = evolve(model, q0, z_end, SplitStepConfig(dz, snapshot_every=10**9))
        err = l2_norm(traj.final - exact)
        mod_err = float(np.max(np.abs(np.abs(traj.final.values) - np.abs(exact.values))))
        rows.append({"dz": dz, "steps": traj.steps, "l2_error": err, "modulus_error": mod_err})
    for prev, cur in zip(rows, rows[1:]):
        cur["ratio"] = prev["l2_error"] / cur["l2_error"] if cur["l2_error"] > 0 else None
    rows[0]["ratio"] = None
    errs = np.array([r["l2_error"] for r in rows])
    dzs = np.array([r["dz"] for r in rows])
    if np.all(errs > 0):
        order = float(np.polyfit(np.log(dzs), np.log(errs), 1)[0])
    else:
        order = None
    report = {"experiment": "convergence", "a": a, "z_end": z_end, "n": grid.n,
              "box": [grid.t_min, grid.t_max], "fitted_order": order,
              "order_in_range": order is not None and ORDER_RANGE[0] <= order <= ORDER_RANGE[1],
              "rows": rows,
              "monotone": bool(np.all(np.diff(errs) < 0)) if np.all(errs > 0) else True}
    plots = {"convergence.svg": dict(series={"L2 error": (np.log10(dzs), errs)},
                                     title="Strang convergence (soliton)", xlabel="log10 dz",
                                     ylabel="error", logy=True)}
    cols = ("dz", "steps", "l2_error", "modulus_error", "ratio")
    return ExperimentResult("convergence", report,
                            {"metrics.csv": (cols, [{**r, "ratio": "" if r["ratio"] is None else r["ratio"]}
                                                    for r in rows])}, plots)


# --- sweep ----------------------------------------------------------------------

def sweep_constants(cfg: ExperimentConfig) -> tuple:
    """Constants from config overrides, else measured on a closeness-style run."""
    bs = cfg.bounds
    delta = 0.05 if bs.delta == "auto" else float(bs.delta)
    if bs.K is not None:
        return B.BoundConstants(bs.K, bs.C_tilde, cfg.model.c2, delta), "config"
    grid = build_grid(cfg)
    datum, _ = scale_datum(initial_datum(cfg, grid), delta)
    z_end = PILOT_Z / cfg.model.c2 if cfg.solver.z_end == "auto" else float(cfg.solver.z_end)
    runs = run_three(cfg, datum, z_end)
    return B.estimate_constants(runs["u"], runs["v"], runs["Q"], cfg.model.c2, delta), "measured"


def run_bound_sweep(cfg: ExperimentConfig, epsilons, deltas, grid_points: int = 16) -> ExperimentResult:
    """Tabulate L(eps), delta_max over z, and the fixed-distance reading."""
    epsilons = [float(e) for e in epsilons]
    deltas = [float(d) for d in deltas]
    for e in epsilons:
        if not e > 0:
            raise ConfigError("--epsilons", f"values must be > 0, got {e}")
    for d in deltas:
        if not d > 0:
            raise ConfigError("--deltas", f"values must be > 0, got {d}")
    if not epsilons and not deltas:
        return ExperimentResult("sweep", {"experiment": "sweep", "epsilons": [], "deltas": [],
                                          "L_of_epsilon": [], "delta_max": [], "reverse": []},
                                {"metrics.csv": (("epsilon", "L_of_epsilon", "saturated"), [])})
    consts, source = sweep_constants(cfg)
    variant = cfg.bounds.variant
    L_rows, dm_rows = [], []
    for eps in epsilons:
        info = B.find_L(eps, consts, variant, full_output=True)
        L_rows.append({"epsilon": eps, "L_of_epsilon": info.L, "saturated": info.saturated})
        zs = np.geomspace(B.DEFAULT_Z_MIN, info.L, grid_points + 1)[:-1]
        for z in zs:
            dm_rows.append({"epsilon": eps, "L": float(z),
                            "delta_max": B.delta_max(float(z), eps, consts, variant)})
    L_bar = None if cfg.solver.z_end == "auto" else float(cfg.solver.z_end)
    reverse = {}
    if L_bar is not None and L_bar > 0:
        reverse = {"L_bar": L_bar,
                   "epsilon_min": B.reverse_epsilon(L_bar, consts, variant),
                   "guaranteed": [{"delta": d,
                                   "epsilon": B.guaranteed_epsilon(L_bar, consts.with_delta(d), variant)}
                                  for d in deltas],
                   "delta_max_at_L_bar": [{"epsilon": e,
                                           "delta_max": (B.delta_max(L_bar, e, consts, variant)
                                                         if B.G_func(L_bar, e, consts, variant)
                                                         > B.H_func(L_bar, consts) else None)}
                                          for e in epsilons]}
    report = {"experiment": "sweep", "constants": consts.as_dict(), "constants_source": source,
              "variant": variant, "epsilons": epsilons, "deltas": deltas,
              "L_of_epsilon": L_rows, "L_monotone": B.monotone_violations(
                  [r["L_of_epsilon"] for r in L_rows], strict=False) == 0,
              "delta_max": dm_rows, "reverse": reverse}
    tables = {"metrics.csv": (("epsilon", "L_of_epsilon", "saturated"), L_rows),
              "delta_max.csv": (("epsilon", "L", "delta_max"), dm_rows)}
    plots = {}
    if L_rows:
        plots["L_of_epsilon.svg"] = dict(series={"L(eps)": ([r["epsilon"] for r in L_rows],
                                                            [r["L_of_epsilon"] for r in L_rows])},
                                         title="L(epsilon)", xlabel="epsilon", ylabel="L")
    return ExperimentResult("sweep", report, tables, plots)


# --- simulate -------------------------------------------------------------------

def run_simulate(cfg: ExperimentConfig) -> ExperimentResult:
    grid = build_grid(cfg)
    eq = cfg.model.equation
    c1, c2 = cfg.model.c1, cfg.model.c2
    model = {"dissipative": ModelKind.dissipative(c1, c2),
             "integrable": ModelKind.integrable(c1, c2),
             "cubic": ModelKind.cubic(cfg.rho)}[eq]
    z_end = cfg.solver.z_end
    if z_end == "auto":
        raise ConfigError("solver.z_end", "simulate needs a numeric z_end")
    v0 = initial_datum(cfg, grid, eq)
    traj = evolve(model, v0, z_end, SplitStepConfig(cfg.solver.dz, cfg.solver.snapshot_every))
    mid = len(traj) // 2
    res = None
    if 1 <= mid < len(traj) - 1:
        zv = traj.z_values
        if math.isclose(zv[mid] - zv[mid - 1], zv[mid + 1] - zv[mid], rel_tol=1e-9):
            res = residual(model, traj, mid)
    report = {"experiment": "simulate", "equation": eq, "c1": c1, "c2": c2, "rho": cfg.rho,
              "z_end": z_end, "steps": traj.steps, "snapshots": len(traj),
              "mass_drift": _drift(traj), "residual_mid": res,
              "final_l2": float(traj.l2[-1]), "final_t2_moment": float(traj.t2_moment[-1]),
              "final_t_ut_moment": float(traj.t_ut_moment[-1])}
    zs = traj.z_values
    plots = {"moments.svg": dict(series={"||u||": (zs, traj.l2), "||t^2 u||": (zs, traj.t2_moment),
                                         "||t u_t||": (zs, traj.t_ut_moment)},
                                 title=f"{eq} model observables", xlabel="z", ylabel="norm")}
    return ExperimentResult("simulate", report, {"metrics.csv": (TRAJECTORY_COLUMNS, traj.observables())}, plots, {"field": traj})


# --- painleve -------------------------------------------------------------------

def run_painleve_check(cfg: ExperimentConfig, tol: float = 1e-8) -> ExperimentResult:
    if cfg.coefficients is not None:
        co = cfg.coefficients
        family = family_from_config({k: co[k] for k in ("f", "g", "h", "v0", "v1", "v2") if k in co},
                                    cfg.base_dir)
        z = np.linspace(co["z_min"], co["z_max"], co["n_z"])
        source = "coefficients"
        expected = None
    elif cfg.fiber is not None:
        fp = cfg.fiber
        family = fiber_family(fp.alpha, fp.beta2, fp.gamma)
        z = np.linspace(0.0, 1.0, 256)
        source = "fiber"
        expected = fp.alpha**2 / (2.0 * fp.beta2)
    else:
        raise ConfigError("coefficients", "painleve-check needs a 'coefficients' or 'fiber' section")
    has_h = np.any(family.h(z) != 0.0)
    v2_cf = v2_fd = None
    if not has_h:
        v2_cf = v2_from_fg(family, z, closed_form=True)
        v2_fd = v2_from_fg(family, z, closed_form=False)
    if family.v2 is None:
        if has_h:
            raise ConfigError("coefficients.v2", "v2 is required when h is nonzero")
        family.v2 = Coefficient.samples(z, v2_cf) if z.size >= 2 else None
        completed = True
    else:
        completed = False
    res = painleve_residual(family, z)
    scale = np.max(np.abs(4 * family.v2(z) * family.f(z) ** 3 * family.g(z) ** 2)) or 1.0
    report = {"experiment": "painleve-check", "source": source, "z_min": float(z[0]),
              "z_max": float(z[-1]), "n_z": int(z.size), "v2_completed": completed,
              "max_residual": float(np.max(np.abs(res))), "residual_scale": float(scale),
              "integrable": bool(np.max(np.abs(res)) < tol), "tolerance": tol}
    if v2_cf is not None:
        report["v2_closed_form_range"] = [float(np.min(v2_cf)), float(np.max(v2_cf))]
        report["v2_fd_max_deviation"] = float(np.max(np.abs(v2_fd - v2_cf)))
    if expected is not None:
        report["v2_expected"] = expected
        report["v2_max_relative_error"] = float(np.max(np.abs(v2_cf / expected - 1)))
    if cfg.fiber is not None:
        norm = normalize(cfg.fiber)
        report["normalization"] = {"c1": norm.params.c1, "c2": norm.params.c2,
                                   "length_scale": norm.length_scale, "time_scale": norm.time_scale,
                                   "amplitude_scale": norm.amplitude_scale,
                                   "peak_amplitude": norm.peak_amplitude,
                                   "LD_over_LNL": norm.regime_ratio, "regime_ok": norm.regime_ok}
    rows = [{"z": float(zi), "residual": float(ri),
             "v2": float(vi) if v2_cf is not None else ""}
            for zi, ri, vi in zip(z, res, v2_cf if v2_cf is not None else res)]
    return ExperimentResult("painleve-check", report, {"metrics.csv": (("z", "residual", "v2"), rows)},
                            {}, {}, EXIT_OK if report["integrable"] else EXIT_VIOLATION)
