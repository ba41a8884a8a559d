import json
from pathlib import Path

import pytest

from fibernls.harness import ConfigError, load_config, parse_config, run_bound_sweep
from fibernls.harness.cli import main

ROOT = Path(__file__).resolve().parents[1]
CLOSENESS = ROOT / "configs" / "closeness.yaml"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_defaults():
    cfg = parse_config({})
    assert cfg.model.c1 == 1 and cfg.rho == 1
    assert cfg.grid.n == 1024 and cfg.bounds.delta == "auto"


@pytest.mark.parametrize("data, path", [
    ({"model": {"c3": 1}}, "model.c3"),
    ({"grid": {"n": 1000}}, "grid"),
    ({"solver": {"dz": -1.0}}, "solver.dz"),
    ({"solver": {"z_end": "soon"}}, "solver.z_end"),
    ({"model": {"c1": 2}}, "model.c1"),
    ({"bounds": {"variant": "cubed"}}, "bounds.variant"),
    ({"bounds": {"K": 1.0}}, "bounds.C_tilde"),
    ({"bounds": {"L_fraction": 1.5}}, "bounds.L_fraction"),
    ({"initial": {"kind": "soliton", "width": 2.0}}, "initial.width"),
    ({"initial": {"kind": "file", "path": "missing.csv"}}, "initial.path"),
    ({"output": {"formats": ["png"]}}, "output.formats"),
    ({"fiber": {"alpha": 0.1}}, "fiber.beta2"),
    ({"fiber": {"alpha": 0.1, "beta2": -1, "gamma": 1, "T0": 1, "P0": 1},
      "model": {"c1": -1}}, "model.c1"),
    ({"extra": {}}, ".extra"),
])
def test_config_errors_name_the_field(data, path, tmp_path):
    with pytest.raises(ConfigError) as info:
        parse_config(data, tmp_path)
    assert info.value.path.endswith(path)


def test_fiber_section_sets_model(tmp_path):
    cfg = parse_config({"fiber": {"alpha": 0.2, "beta2": 1.0, "gamma": 1, "T0": 1, "P0": 1}})
    assert cfg.model.c1 == -1 and cfg.model.c2 == pytest.approx(0.4)


def test_load_json_and_yaml(tmp_path):
    j = write(tmp_path, "a.json", json.dumps({"model": {"c2": 0.5}}))
    y = write(tmp_path, "a.yaml", "model: {c2: 0.5}\n")
    assert load_config(j).model.c2 == load_config(y).model.c2 == 0.5
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "b.yaml", "model: [1, 2\n"))
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.yaml")


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = write(tmp_path, "bad.yaml", "model: {c2: -1}\n")
    assert main(["closeness", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "model.c2" in capsys.readouterr().err


def test_cli_numerical_failure_exit_code(tmp_path):
    # a numeric z_end beyond L(eps) leaves no admissible delta
    cfg = write(tmp_path, "c.yaml", "solver: {z_end: 5.0}\nbounds: {delta: auto}\n")
    assert main(["closeness", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_closeness_outputs(tmp_path):
    out = tmp_path / "o"
    assert main(["closeness", "--config", str(CLOSENESS), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    for key in ("K", "C", "C_tilde", "delta", "epsilon", "L_of_epsilon", "delta_max", "samples"):
        assert key in report
    assert report["verdict"] == "pass" and report["exit_code"] == 0
    assert report["delta"] < report["delta_max"]
    assert report["z_end"] < report["L_of_epsilon"]
    header = (out / "metrics.csv").read_text().splitlines()[0]
    assert header.startswith("z,Z,measured_distance,distance_bound")
    assert (out / "plots" / "distance.svg").read_text().startswith("<svg")


def test_closeness_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["closeness", "--config", str(CLOSENESS), "--out", str(d)]) == 0
    for name in ("metrics.csv", "report.json", "plots/distance.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_zero_datum(tmp_path):
    cfg = write(tmp_path, "z.yaml", "solver: {z_end: 0.5, dz: 0.01}\nbounds: {delta: 0.1}\n"
                "initial: {kind: gaussian, amplitude: 0.0}\n")
    out = tmp_path / "o"
    assert main(["closeness", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["K"] == 0 and report["max_distance"] == 0


def test_simulate_writes_fields(tmp_path):
    cfg = write(tmp_path, "s.yaml", "model: {equation: integrable}\n"
                "solver: {dz: 0.01, z_end: 0.1, snapshot_every: 5}\n"
                "output: {fields: true}\n")
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    fields = sorted(p.name for p in (out / "fields").iterdir())
    assert fields == ["field_00000.csv", "field_00001.csv", "field_00002.csv"]
    rows = (out / "metrics.csv").read_text().splitlines()
    assert rows[0] == "z,l2,t2_moment,t_ut_moment" and len(rows) == 4
    report = json.loads((out / "report.json").read_text())
    assert report["mass_drift"] < 1e-12


def test_file_datum(tmp_path):
    from fibernls.field import make_gaussian, make_grid, write_field_csv
    write_field_csv(make_gaussian(make_grid(-20, 20, 256), 0.5, 1.0), tmp_path / "u0.csv")
    cfg = write(tmp_path, "f.yaml", "grid: {n: 256}\nsolver: {dz: 0.01, z_end: 0.05}\n"
                "initial: {kind: file, path: u0.csv}\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    mism = write(tmp_path, "g.yaml", "grid: {n: 512}\ninitial: {kind: file, path: u0.csv}\n")
    assert main(["simulate", "--config", str(mism), "--out", str(tmp_path / "p")]) == 2


def test_convergence_cli(tmp_path):
    cfg = write(tmp_path, "c.yaml", "model: {equation: cubic}\ngrid: {n: 512}\n"
                "solver: {dz: 0.004, z_end: 0.2}\ninitial: {kind: soliton, a: 1.0}\n")
    out = tmp_path / "o"
    assert main(["convergence", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["order_in_range"] and len(report["rows"]) == 4
    assert main(["convergence", "--out", str(tmp_path / "p")]) == 2


def test_sweep_cli(tmp_path):
    cfg = write(tmp_path, "s.yaml", "solver: {z_end: 0.1}\nbounds: {K: 2.0, C_tilde: 4.0}\n")
    out = tmp_path / "o"
    assert main(["sweep", "--config", str(cfg), "--out", str(out),
                 "--epsilons", "0.05", "0.1", "0.2", "--deltas", "0.01", "0.05"]) == 0
    report = json.loads((out / "report.json").read_text())
    Ls = [r["L_of_epsilon"] for r in report["L_of_epsilon"]]
    assert Ls == sorted(Ls) and report["L_monotone"]
    assert len(report["reverse"]["guaranteed"]) == 2
    assert (out / "delta_max.csv").exists()


def test_empty_sweep():
    result = run_bound_sweep(parse_config({}), [], [])
    assert result.report["L_of_epsilon"] == [] and result.exit_code == 0


def test_sweep_rejects_nonpositive(tmp_path):
    assert main(["sweep", "--out", str(tmp_path), "--epsilons", "-0.1"]) == 2


def test_painleve_cli(tmp_path):
    good = write(tmp_path, "p.yaml",
                 "fiber: {alpha: 0.5, beta2: -2.0, gamma: 1.0, T0: 1.0, P0: 1.0}\n")
    assert main(["painleve-check", "--config", str(good), "--out", str(tmp_path / "a")]) == 0
    bumped = write(tmp_path, "q.yaml", "coefficients:\n"
                   "  f: {kind: const, value: -1.0}\n"
                   "  g: {kind: exp, scale: -1.0, rate: -0.5}\n"
                   "  v2: {kind: const, value: -0.025}\n")
    assert main(["painleve-check", "--config", str(bumped), "--out", str(tmp_path / "b")]) == 1
    exact = write(tmp_path, "r.yaml", "coefficients:\n"
                  "  f: {kind: const, value: -1.0}\n"
                  "  g: {kind: exp, scale: -1.0, rate: -0.5}\n"
                  "  v2: {kind: const, value: -0.0625}\n")
    assert main(["painleve-check", "--config", str(exact), "--out", str(tmp_path / "c")]) == 0
    assert main(["painleve-check", "--out", str(tmp_path / "d")]) == 2


@pytest.mark.parametrize("path", sorted((ROOT / "configs").glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    assert load_config(path).grid.n >= 16
