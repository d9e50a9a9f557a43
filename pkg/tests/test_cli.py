"""Config ingestion, CSV emission, exit codes of the command line."""

import numpy as np
import pytest

from coxleo import cli
from coxleo.constellation import fit_cox

COVERAGE_CONFIG = """
[propagation]
noise_power_w = 1e-8

[[constellation]]
mean_orbits = 40.0
mean_sats_per_orbit = 30.0
radius_km = 6950.0
gain_db = 20.0

[[constellation]]
mean_orbits = 40.0
mean_sats_per_orbit = 30.0
radius_km = 6950.0

[sweep]
grid = [-5.0, 0.0, 5.0, 10.0]

[run]
serving_type = 0
trials = 5000
seed = 7
"""


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analytic_csv_shape(tmp_path, capsys):
    cfg = write(tmp_path, COVERAGE_CONFIG)
    code, out, err = run(["coverage-closed", "--config", cfg], capsys)
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "tau_db,coverage_analytic"
    assert len(lines) == 1 + 4  # header plus one row per grid point
    first = lines[1].split(",")
    assert float(first[0]) == -5.0
    assert 0.9 < float(first[1]) < 1.0


def test_byte_identical_reruns(tmp_path, capsys):
    cfg = write(tmp_path, COVERAGE_CONFIG)
    out_a = str(tmp_path / "a.csv")
    out_b = str(tmp_path / "b.csv")
    assert cli.main(["coverage-closed", "--config", cfg, "--engine", "both",
                     "--out", out_a]) == 0
    assert cli.main(["coverage-closed", "--config", cfg, "--engine", "both",
                     "--out", out_b]) == 0
    capsys.readouterr()
    a, b = open(out_a, "rb").read(), open(out_b, "rb").read()
    assert a == b
    header = a.decode().split("\n")[0]
    assert header == "tau_db,coverage_analytic,coverage_mc,mc_stderr"


def test_seed_changes_mc_column(tmp_path, capsys):
    cfg = write(tmp_path, COVERAGE_CONFIG)
    code1, out1, _ = run(["simulate", "--config", cfg, "--seed", "1"], capsys)
    code2, out2, _ = run(["simulate", "--config", cfg, "--seed", "2"], capsys)
    assert code1 == code2 == 0
    assert out1 != out2


def test_both_engines_disagreement_exits_3(tmp_path, capsys):
    # one trial pins the empirical curve to 0 or 1, far from the
    # analytic mid-range value, beyond any stderr allowance
    cfg = write(tmp_path, COVERAGE_CONFIG.replace("trials = 5000", "trials = 1")
                .replace("grid = [-5.0, 0.0, 5.0, 10.0]", "grid = [6.0]"))
    code, out, err = run(["coverage-closed", "--config", cfg,
                          "--engine", "both"], capsys)
    assert code == 3
    assert "disagree" in err


def test_workers_env_var_preserves_bytes(tmp_path, capsys, monkeypatch):
    cfg = write(tmp_path, COVERAGE_CONFIG)
    monkeypatch.setenv("COXLEO_WORKERS", "1")
    code1, out1, _ = run(["simulate", "--config", cfg], capsys)
    monkeypatch.setenv("COXLEO_WORKERS", "2")
    code2, out2, _ = run(["simulate", "--config", cfg], capsys)
    assert code1 == code2 == 0
    assert out1 == out2


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = write(tmp_path, COVERAGE_CONFIG.replace("radius_km = 6950.0",
                                                  "radius_miles = 4318.0", 1))
    code, _, err = run(["coverage-closed", "--config", cfg], capsys)
    assert code == 2
    assert "unknown key constellation[0].radius_miles" in err


def test_empty_network_rejected(tmp_path, capsys):
    cfg = write(tmp_path, "constellation = []\n[sweep]\ngrid = [0.0]\n")
    code, _, err = run(["coverage-open", "--config", cfg], capsys)
    assert code == 2
    assert "constellation" in err


def test_toml_errors_carry_line_numbers(tmp_path, capsys):
    cfg = write(tmp_path, "[[constellation]\nmean_orbits = 1.0\n")
    code, _, err = run(["coverage-open", "--config", cfg], capsys)
    assert code == 2
    assert "line 1" in err


def test_unsorted_grid_rejected(tmp_path, capsys):
    cfg = write(tmp_path, COVERAGE_CONFIG.replace(
        "grid = [-5.0, 0.0, 5.0, 10.0]", "grid = [5.0, 0.0]"))
    code, _, err = run(["coverage-closed", "--config", cfg], capsys)
    assert code == 2
    assert "increasing" in err


def test_montecarlo_requires_trials(tmp_path, capsys):
    cfg = write(tmp_path, COVERAGE_CONFIG)
    code, _, err = run(["coverage-closed", "--config", cfg,
                        "--engine", "montecarlo", "--trials", "0"], capsys)
    assert code == 2
    assert "trials" in err


def test_mode_mismatch_rejected(tmp_path, capsys):
    cfg = write(tmp_path, 'mode = "simulate"\n' + COVERAGE_CONFIG)
    code, _, err = run(["coverage-closed", "--config", cfg], capsys)
    assert code == 2
    assert "mode" in err


def test_open_access_refuses_serving_type(tmp_path, capsys):
    cfg = write(tmp_path, COVERAGE_CONFIG)
    code, _, err = run(["coverage-open", "--config", cfg], capsys)
    assert code == 2
    assert "serving_type" in err


def test_validate_config_flags_defaults(tmp_path, capsys):
    cfg = write(tmp_path, 'mode = "coverage-closed"\n' + COVERAGE_CONFIG)
    code, out, _ = run(["validate-config", "--config", cfg], capsys)
    assert code == 0
    assert "mode = coverage-closed" in out
    assert "propagation.path_loss_exponent = 3.0  (default)" in out
    assert "constellation[0].radius_km = 6950.0 km" in out
    assert "run.engine = analytic  (default)" in out


def test_validate_config_needs_mode_key(tmp_path, capsys):
    cfg = write(tmp_path, COVERAGE_CONFIG)
    code, _, err = run(["validate-config", "--config", cfg], capsys)
    assert code == 2
    assert "mode" in err


def test_no_satellite_sweep(tmp_path, capsys):
    cfg = write(tmp_path, """
[[constellation]]
mean_orbits = 25.0
mean_sats_per_orbit = 22.0
altitude_km = 400.0

[sweep]
parameter = "mean_orbits"
grid = [10.0, 25.0, 40.0]

[run]
serving_type = 0
""")
    code, out, _ = run(["no-satellite", "--config", cfg], capsys)
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "mean_orbits,no_satellite_analytic"
    vals = [float(l.split(",")[1]) for l in lines[1:]]
    assert len(vals) == 3
    assert vals[0] > vals[1] > vals[2]  # more orbits, fewer empty skies


def test_fit_mode_matches_library(tmp_path, capsys):
    cfg = write(tmp_path, """
[sweep]
grid = [30.0, 60.0]

[fit]
radius_km = 6930.0
fix_mu = 15.0
""")
    code, out, _ = run(["fit", "--config", cfg], capsys)
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "target_visible,mean_orbits,mean_sats_per_orbit,radius_km"
    row = lines[2].split(",")
    want = fit_cox(60.0, 6930.0, fix_mu=15.0)
    assert abs(float(row[1]) - want.lambda_hat) < 1e-12
    assert float(row[2]) == 15.0


def test_compare_mode_runs(tmp_path, capsys):
    cfg = write(tmp_path, """
[propagation]
noise_power_w = 1e-8

[sweep]
grid = [-2.0, 2.0, 6.0, 10.0]

[run]
trials = 4000
seed = 1

[compare]
latitude_deg = 30.0
rotations = 256
systems = [
  { shells = ["starlink_2a_g1"], reuse_factor = 8, gain_db = 20.0, fix_mu = 15.0 },
]
""")
    code, out, err = run(["compare", "--config", cfg], capsys)
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "tau_db,coverage_walker,walker_stderr,coverage_fitted"
    assert len(lines) == 5
    assert "horizontal gap" in err


def test_association_sweep_monotone(tmp_path, capsys):
    cfg = write(tmp_path, """
[[constellation]]
mean_orbits = 20.0
mean_sats_per_orbit = 30.0
radius_km = 7000.0

[[constellation]]
mean_orbits = 30.0
mean_sats_per_orbit = 30.0
radius_km = 7000.0

[sweep]
parameter = "mean_orbits"
constellation = 0
grid = [10.0, 30.0, 50.0]
""")
    code, out, _ = run(["association", "--config", cfg], capsys)
    assert code == 0
    vals = [float(l.split(",")[1]) for l in out.strip().split("\n")[1:]]
    assert vals[0] < vals[1] < vals[2]


def test_coverage_drops_with_more_constellations(tmp_path, capsys):
    # same-type interferers pile up as the network gains constellations
    block = """
[[constellation]]
mean_orbits = 36.0
mean_sats_per_orbit = 30.0
radius_km = 6950.0
gain_db = 27.0
"""
    tail = """
[sweep]
grid = [-5.0, 0.0, 5.0]
[run]
serving_type = 0
"""
    curves = []
    for k in range(1, 5):
        cfg = write(tmp_path, block * k + tail, name=f"k{k}.toml")
        code, out, _ = run(["coverage-closed", "--config", cfg], capsys)
        assert code == 0
        curves.append([float(l.split(",")[1]) for l in out.strip().split("\n")[1:]])
    for smaller, larger in zip(curves[1:], curves):
        assert all(s < l for s, l in zip(smaller, larger))


def test_help_documents_units(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "dB" in out and "km" in out
    assert "COXLEO_WORKERS" in out
