"""Acceptance criteria 1-9, each at its stated tolerance.

Every test records one PASS/FAIL line, and the lines are repeated in the
pytest terminal summary.
"""

import itertools
import math
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from fibernls import bounds as B
from fibernls.field import ComplexField, l2_norm, make_gaussian, make_grid, weighted_norm_t2
from fibernls.harness import parse_config, run_closeness, run_convergence
from fibernls.harness.cli import main
from fibernls.models import Coefficient, CoefficientFamily, fiber_family, painleve_residual, v2_from_fg
from fibernls.solver import ModelKind, SplitStepConfig, evolve
from fibernls.transform import (MapParams, forward_map, inverse_map, lemma_shift_check,
                                transformed_soliton, z_to_Z)

ROOT = Path(__file__).resolve().parents[1]
CLOSENESS = ROOT / "configs" / "closeness.yaml"


def test_1_painleve_reproduction(criterion):
    z = np.linspace(0.0, 2.0, 256)
    worst_cf = worst_fd = worst_res = 0.0
    for alpha, beta2, gamma in itertools.product((0.2, 0.5, 1.0), (1.0, -1.0, 2.0, -2.0), (1.0, 2.0)):
        fam = fiber_family(alpha, beta2, gamma)
        expected = alpha**2 / (2 * beta2)
        cf = v2_from_fg(fam, z, closed_form=True)
        fd = v2_from_fg(fam, z, closed_form=False)
        worst_cf = max(worst_cf, float(np.max(np.abs(cf / expected - 1))))
        worst_fd = max(worst_fd, float(np.max(np.abs(fd / expected - 1))))
        completed = CoefficientFamily(fam.f, fam.g, v2=Coefficient.samples(z, cf))
        worst_res = max(worst_res, float(np.max(np.abs(painleve_residual(completed, z)))))
    ok = worst_cf < 1e-8 and worst_fd < 1e-4 and worst_res < 1e-8
    criterion(1, "Painleve reproduction", ok,
              f"closed-form rel err {worst_cf:.2e} (<1e-8), FD rel err {worst_fd:.2e} (<1e-4), "
              f"residual {worst_res:.2e} (<1e-8)")
    assert ok


def test_2_solver_order(criterion):
    cfg = parse_config({"model": {"equation": "cubic"}, "grid": {"t_min": -20, "t_max": 20, "n": 1024},
                        "solver": {"dz": 1e-3, "z_end": 1.0}, "initial": {"kind": "soliton", "a": 1.0}})
    report = run_convergence(cfg).report
    order = report["fitted_order"]
    err = report["rows"][0]["l2_error"]
    ok_order = 1.8 <= order <= 2.2
    ok_err = err < 1e-6
    criterion(2, "Strang order", ok_order and ok_err,
              f"fitted order {order:.4f} (in [1.8, 2.2]: {ok_order}), "
              f"L2 error at dz=1e-3 {err:.3e} (<1e-6: {ok_err})")
    assert ok_order
    assert ok_err, "L2 error at dz=1e-3 exceeds 1e-6"


def test_3_conservation(criterion):
    grid = make_grid(-20.0, 20.0, 1024)
    u0 = make_gaussian(grid, 1.0, 1.0)
    drifts = {}
    for name, model in (("dissipative", ModelKind.dissipative(1, 1.0)),
                        ("integrable", ModelKind.integrable(1, 1.0)),
                        ("cubic", ModelKind.cubic(1))):
        traj = evolve(model, u0, 2.0, SplitStepConfig(1e-3, snapshot_every=50))
        drifts[name] = float(np.max(np.abs(traj.l2**2 / traj.l2[0] ** 2 - 1)))
    ok = max(drifts.values()) < 1e-10
    criterion(3, "Mass conservation", ok,
              ", ".join(f"{k} {v:.2e}" for k, v in drifts.items()) + " (<1e-10)")
    assert ok


def test_4_transform_fidelity(criterion):
    grid = make_grid(-60.0, 60.0, 2048)
    t = grid.t
    worst_rt = 0.0
    for c2, c2z in itertools.product((0.5, 1.0, 2.0), (0.1, 0.5, 1.0)):
        z = c2z / c2
        v = ComplexField(grid, np.exp(-t**2 / 2 + 0.25j * c2 * t**2 + 0.4j * t), z)
        q = inverse_map(v, MapParams(c2))
        back = forward_map(q, z, grid, MapParams(c2))
        worst_rt = max(worst_rt, l2_norm(back - v) / l2_norm(v))
    sgrid = make_grid(-40.0, 40.0, 2048)
    v0 = transformed_soliton(1.0, 1.0, 0.0, sgrid)
    traj = evolve(ModelKind.integrable(1, 1.0), v0, 0.5, SplitStepConfig(1e-3, snapshot_every=10**9))
    exact = transformed_soliton(1.0, 1.0, 0.5, sgrid)
    prop = l2_norm(traj.final - exact) / l2_norm(exact)
    ok = worst_rt < 1e-8 and prop < 1e-4
    criterion(4, "Transform fidelity", ok,
              f"round-trip rel err {worst_rt:.2e} (<1e-8), soliton propagation rel err {prop:.2e} (<1e-4)")
    assert ok


def test_5_lemma_relation(criterion):
    c2 = 1.0
    grid = make_grid(-30.0, 30.0, 2048)
    v0 = make_gaussian(grid, 1.0, 1.0)
    zs = np.linspace(0.05, 1.0, 20)
    v = evolve(ModelKind.integrable(1, c2), v0, 1.0, SplitStepConfig(1e-3), record_at=zs)
    q0 = inverse_map(v0, MapParams(c2))
    Zs = z_to_Z(zs, c2)
    q = evolve(ModelKind.cubic(1), q0, float(Zs[-1]), SplitStepConfig(1e-3), record_at=Zs)
    worst_evolved = worst_mapped = 0.0
    for vs, qs in zip(v.snapshots, q.snapshots):
        lhs = weighted_norm_t2(vs)
        rhs = math.exp(2 * c2 * vs.z) * weighted_norm_t2(qs)
        worst_evolved = max(worst_evolved, abs(lhs - rhs) / lhs)
        a, b = lemma_shift_check(vs, MapParams(c2))
        worst_mapped = max(worst_mapped, abs(a - b) / a)
    ok = worst_evolved < 1e-4 and worst_mapped < 1e-4
    criterion(5, "Moment shift relation", ok,
              f"independent Q run {worst_evolved:.2e}, mapped snapshots {worst_mapped:.2e} (<1e-4)")
    assert ok


def test_6_bound_chain(criterion):
    worst = 0.0
    for c2, Ct, delta in itertools.product((0.5, 1.0, 2.0), repeat=3):
        consts = B.BoundConstants(1.0, Ct, c2, delta)
        Zgrid = np.linspace(0.0, 0.9 * 0.5 / c2, 10_001)
        cum = integrate.cumulative_simpson(4 * B.h_bound(Zgrid, consts), x=Zgrid, initial=0.0)
        for idx in (1000, 2500, 5000, 7500, 10_000):
            worst = max(worst, abs(B.f_bound(Zgrid[idx], consts) - (delta + cum[idx])))
    ok = worst < 1e-10
    criterion(6, "Bound-chain identity", ok, f"max |f - (delta + 4 int h)| {worst:.2e} (<1e-10)")
    assert ok


def test_7_domination(criterion):
    cfg = parse_config({"model": {"c1": 1, "c2": 1.0},
                        "solver": {"dz": 1e-3, "z_end": "auto", "snapshot_every": 10},
                        "initial": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0},
                        "bounds": {"epsilon": 0.1, "delta": "auto", "variant": "squared"}})
    result = run_closeness(cfg)
    r = result.report
    worst, ratio = {}, {}
    for s in r["samples"]:
        for name, m, b in (("distance", "measured_distance", "distance_bound"),
                           ("tQT", "measured_tQT", "h_bound"), ("T2Q", "measured_T2Q", "f_bound"),
                           ("t2v", "measured_t2v", "g_bound")):
            worst[name] = max(worst.get(name, -math.inf), s[m] - s[b])
            if s[b] > 0:
                ratio[name] = max(ratio.get(name, 0.0), s[m] / s[b])
    ok = (result.exit_code == 0 and all(v <= 0 for v in worst.values())
          and r["z_end"] < r["L_of_epsilon"] and r["delta"] < r["delta_max"])
    criterion(7, "Bound domination", ok,
              f"{len(r['samples'])} samples on [0, {r['z_end']:.4f}], delta {r['delta']:.4f}, "
              "max measured/bound: " + ", ".join(f"{k} {v:.3f}" for k, v in ratio.items()))
    assert ok


def test_8_G_H_structure(criterion):
    consts = B.BoundConstants(K=1.0, C_tilde=2.0, c2=1.0)
    z = B.z_grid(consts)
    G = B.G_func(z, 0.1, consts)
    H = B.H_func(z, consts)
    limit = (8 / 2.0) * (math.exp(2.0 / 4.0) - 1) - 2.0
    res = B.find_L(0.1, consts, full_output=True)
    checks = {
        "G strictly decreasing": bool(np.all(np.diff(G) < 0)),
        "H strictly increasing": bool(np.all(np.diff(H) > 0)),
        "H(z_min) < 1e-6": H[0] < 1e-6,
        "|H(z_max) - limit| < 1e-3": abs(H[-1] - limit) < 1e-3,
        "root residual < 1e-8": abs(res.residual) < 1e-8,
    }
    ok = all(checks.values())
    criterion(8, "G/H structure", ok,
              f"H(z_min) {H[0]:.2e}, H(z_max) - limit {H[-1] - limit:.2e}, L {res.L:.6f}, "
              f"residual {res.residual:.2e}; failed: {[k for k, v in checks.items() if not v]}")
    assert ok


def test_9_determinism(criterion, tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    codes = [main(["closeness", "--config", str(CLOSENESS), "--out", str(o)]) for o in outs]
    same = {name: (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
            for name in ("metrics.csv", "report.json")}
    ok = codes == [0, 0] and all(same.values())
    criterion(9, "Determinism", ok, f"exit codes {codes}, byte-identical {same}")
    assert ok
