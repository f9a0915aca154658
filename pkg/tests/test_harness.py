import csv
import io
import json
import math

import pytest

from rsma_sim import cli
from rsma_sim.exceptions import ConfigurationError
from rsma_sim.harness import (
    CSV_COLUMNS,
    SweepSpec,
    load_config,
    preset,
    rows_to_csv,
    rows_to_json,
    run_sweep,
    spec_from_dict,
    spec_to_dict,
    validate,
)
from rsma_sim.precoding import Scheme
from rsma_sim.rsma import SystemConfig


def small_rho_spec(**kw):
    fixed = SystemConfig(L=6, K=3, Pt=10.0, sigma2=1.0)
    base = dict(swept_parameter="rho", grid=[0.0, 0.5, 1.0], fixed=fixed,
                schemes=[Scheme.MF_JOINT, Scheme.MRT_ZF, Scheme.MRT_RZF], trials_per_point=200)
    base.update(kw)
    return SweepSpec(**base)


# ---------------------------------------------------------------- presets
def test_fig3_preset():
    s = preset("fig3", Pt=10.0)
    assert (s.theta, s.fixed.rho, s.fixed.N) == (5.0, 0.5, 10)
    assert s.swept_parameter == "L"
    with pytest.raises(ConfigurationError):
        preset("fig3")


def test_fig4_preset():
    s = preset("fig4")
    assert (s.fixed.L, s.fixed.K, s.fixed.Pt) == (12, 4, 10.0)
    assert len(s.grid) == 11 and s.grid[0] == 0.0 and s.grid[-1] == 1.0


def test_macrocell_presets():
    f5, f6 = preset("fig5"), preset("fig6")
    assert (f5.fixed.L, f5.fixed.K) == (8, 8)
    assert (f6.fixed.L, f6.fixed.K) == (16, 8)
    for s in (f5, f6):
        assert s.fixed.N is None
        assert s.fixed.Pt == pytest.approx(10.0)  # 40 dBm
        assert s.drops == 1000
        assert s.scenario == "macrocell"
        assert set(s.schemes) == {Scheme.MF_JOINT, Scheme.MRT_ZF, Scheme.MRT_RZF}


def test_unknown_preset():
    with pytest.raises(ConfigurationError):
        preset("fig9")


# ---------------------------------------------------------------- validation
def test_validation_rejects_imperfect_zf():
    spec = small_rho_spec(fixed=SystemConfig(L=6, K=3, Pt=10.0, N=10, scheme=Scheme.MF_JOINT))
    with pytest.raises(ConfigurationError):
        validate(spec)


@pytest.mark.parametrize("kw", [
    dict(grid=[0.0, 1.5]),
    dict(grid=[0.5, 0.1]),
    dict(grid=[]),
    dict(schemes=[]),
    dict(swept_parameter="K"),
    dict(scenario="indoor"),
    dict(scenario="macrocell", r_in=500.0, r_out=35.0),
    dict(drops=2),
])
def test_validation_rejects(kw):
    with pytest.raises(ConfigurationError):
        validate(small_rho_spec(**kw))


def test_validation_theta_integrality():
    spec = preset("fig3", Pt=10.0)
    spec.grid = [10, 12]
    with pytest.raises(ConfigurationError):
        validate(spec)


# ---------------------------------------------------------------- sweeps
def test_rows_decompose_and_degenerate():
    rows = run_sweep(small_rho_spec(), seed=1)
    assert len(rows) == 9
    for r in rows:
        assert r.esr == r.min_common_rate + r.private_sum_rate
        assert abs(r.esr - (r.min_common_rate + r.private_sum_rate)) <= 1e-12
        assert r.mc_stderr >= 0
        if r.param_value == 0.0:
            assert r.min_common_rate == 0.0
        if r.param_value == 1.0:
            assert r.private_sum_rate == 0.0


def test_analytic_columns_for_mf_symmetric():
    rows = run_sweep(small_rho_spec(schemes=[Scheme.MF_JOINT]), seed=0)
    assert all(r.analytic_esr is not None for r in rows)
    assert rows[1].analytic_esr == pytest.approx(rows[1].analytic_min_common + rows[1].analytic_private_sum)


def test_csv_is_deterministic_across_threads():
    spec = small_rho_spec()
    a = rows_to_csv(run_sweep(spec, seed=9, threads=1))
    b = rows_to_csv(run_sweep(spec, seed=9, threads=3))
    assert a == b
    c = rows_to_csv(run_sweep(spec, seed=10, threads=1))
    assert a != c


def test_csv_format():
    text = rows_to_csv(run_sweep(small_rho_spec(schemes=[Scheme.MF_JOINT]), seed=0))
    assert text.endswith("\r\n")
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == CSV_COLUMNS
    esr = parsed[2][CSV_COLUMNS.index("esr")]
    # 17 significant digits round-trip exactly
    assert float(esr) == float(format(float(esr), ".17g"))
    assert "e" in esr or len(esr.replace(".", "").lstrip("0")) >= 15


def test_macrocell_sweep_small():
    spec = preset("fig6", drops=3, trials_per_point=64, grid=[0.0, 0.5])
    rows = run_sweep(spec, seed=2)
    assert len(rows) == 6
    assert all(r.n_drops + r.skipped_singular == 3 for r in rows)
    assert all(math.isfinite(r.esr) for r in rows)


def test_l_sweep_pins_theta():
    spec = preset("fig3", Pt=10.0, trials_per_point=64, grid=[10, 20])
    rows = run_sweep(spec, seed=0)
    assert [r.param_value for r in rows] == [10, 20]
    assert rows[1].esr > rows[0].esr


def test_pt_and_n_sweeps():
    fixed = SystemConfig(L=6, K=3, Pt=10.0, N=10)
    rows = run_sweep(SweepSpec("N", [1, 100], fixed, [Scheme.MF_JOINT], trials_per_point=300), seed=0)
    assert rows[1].private_sum_rate > rows[0].private_sum_rate
    rows = run_sweep(SweepSpec("Pt", [1.0, 100.0], SystemConfig(L=6, K=3, Pt=1.0),
                               [Scheme.MRT_ZF], trials_per_point=300), seed=0)
    assert rows[1].esr > rows[0].esr


# ---------------------------------------------------------------- serialization
def test_spec_round_trip(tmp_path):
    spec = small_rho_spec()
    d = spec_to_dict(spec)
    again = spec_from_dict(json.loads(json.dumps(d)))
    assert spec_to_dict(again) == d
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(d))
    assert spec_to_dict(load_config(path)) == d


def test_config_with_preset_key():
    spec = spec_from_dict({"preset": "fig4", "fixed": {"N": 100}, "trials_per_point": 50})
    assert spec.fixed.N == 100 and spec.trials_per_point == 50


def test_config_unknown_field():
    d = spec_to_dict(small_rho_spec())
    d["colour"] = "blue"
    with pytest.raises(ConfigurationError):
        spec_from_dict(d)


def test_json_output_echoes_config():
    spec = small_rho_spec(schemes=[Scheme.MF_JOINT], grid=[0.5])
    doc = json.loads(rows_to_json(run_sweep(spec, seed=4), spec, 4))
    assert doc["seed"] == 4
    assert doc["config"]["fixed"]["L"] == 6
    assert doc["rows"][0]["scheme"] == "MF_JOINT"


# ---------------------------------------------------------------- CLI
def test_cli_sweep_csv(tmp_path, capsys):
    out = tmp_path / "fig4.csv"
    assert cli.main(["sweep", "--preset", "fig4", "--trials", "64", "--seed", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].split(",") == CSV_COLUMNS
    assert len(lines) == 12


def test_cli_sweep_threads_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--preset", "fig5", "--drops", "2", "--trials", "64", "--seed", "1"]
    assert cli.main(args + ["--threads", "1", "--out", str(a)]) == 0
    assert cli.main(args + ["--threads", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_sweep_config_json(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(spec_to_dict(small_rho_spec(schemes=["MF_JOINT"], grid=[0.5]))))
    assert cli.main(["sweep", "--config", str(cfg), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["rows"]) == 1


def test_cli_configuration_error_exit_code(capsys):
    assert cli.main(["sweep", "--preset", "fig3"]) == 2
    assert "Pt" in capsys.readouterr().err


def test_cli_analytic(capsys):
    assert cli.main(["analytic", "--rho", "0", "0.5", "--pt", "10"]) == 0
    out = capsys.readouterr().out.splitlines()
    row = out[-1].split()
    assert float(row[0]) == 0.5
    assert float(row[2]) == pytest.approx(math.log2(1 + 25 / 6), abs=1e-5)
    assert float(out[-2].split()[1]) == 0.0


def test_cli_rejects_bad_arguments():
    with pytest.raises(SystemExit):
        cli.main(["sweep"])
    with pytest.raises(SystemExit):
        cli.main(["sweep", "--preset", "fig4", "--format", "xml"])
