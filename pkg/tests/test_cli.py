import json

import pytest

from mgspectral.cli import main
from mgspectral.diagnostics import read_diagnostics_csv

QUICK_LINE_CFG = """
[run]
kind = line
scheme = if_rk4
seed = 9

[grid]
N = 8

[line]
q = 1,1,1
N_L = 8
beta = 2.0

[time]
dt = 0.05
t_end = 0.5
record_every = 1

[analysis]
sobolev_orders = 0, 2.51

[checks]
enabled = true
leakage_tol = 1e-10
projected_mass_tol = 1e-12
divergence_tol = 1e-12
nonlinear_rel_tol = 1e-12
max_principle = true

[outputs]
snapshots = ends
symbol_slices = 0,1
"""


@pytest.fixture
def quick_cfg(tmp_path):
    path = tmp_path / "quick.cfg"
    path.write_text(QUICK_LINE_CFG)
    return path


def test_symbols_subcommand(tmp_path, capsys):
    rc = main(["symbols", "--probe", "0.5", "--k1", "64:4096",
               "--line", "1,1,1", "--cone", "1", "--table", "4",
               "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "m_lower=0.5 m_upper=1" in out
    assert "bounds = [0.25, 4]" in out
    sym = tmp_path / "symbols"
    probe = json.loads((sym / "probe_r0.5.json").read_text())
    assert abs(probe["slopes"][0] - 0.5) < 0.05
    assert abs(probe["slopes"][1] - 1.0) < 0.05
    assert abs(probe["slopes"][2] - 1.0) < 0.05
    assert (sym / "symbols_table.csv").exists()
    assert (sym / "line_1_1_1.json").exists()
    assert (sym / "cone_1.json").exists()


def test_symbols_requires_an_action(tmp_path):
    assert main(["symbols", "--out", str(tmp_path)]) == 3


def test_line_run_quick_config(tmp_path, quick_cfg):
    out = tmp_path / "runs"
    rc = main(["line-run", "--config", str(quick_cfg), "--out", str(out)])
    assert rc == 0
    rundir = out / "quick"
    records, orders = read_diagnostics_csv(rundir / "diagnostics.csv")
    assert orders == [0.0, 2.51]
    assert len(records) == 11
    summary = json.loads((rundir / "summary.json").read_text())
    assert summary["all_checks_passed"]
    assert summary["decay_fits"]["2.51"]["rate"] == pytest.approx(-0.5, abs=1e-3)
    assert summary["line"]["m_lower"] == 0.5
    assert (rundir / "manifest.json").exists()
    assert (rundir / "symbols.csv").exists()
    snaps = sorted((rundir / "snapshots").glob("*.mgsf"))
    assert len(snaps) == 2


def test_line_run_inadmissible_line_exits_config(tmp_path, quick_cfg):
    bad = tmp_path / "bad.cfg"
    bad.write_text(QUICK_LINE_CFG.replace("q = 1,1,1", "q = 1,1,0"))
    rc = main(["line-run", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert rc == 3


def test_config_errors_exit_3(tmp_path):
    missing = tmp_path / "nope.cfg"
    assert main(["line-run", "--config", str(missing), "--out", str(tmp_path)]) == 3
    garbled = tmp_path / "garbled.cfg"
    garbled.write_text("[grid]\nN == 4\n")
    assert main(["line-run", "--config", str(garbled), "--out", str(tmp_path)]) == 3


def test_check_failure_exits_2(tmp_path, quick_cfg):
    strict = tmp_path / "strict.cfg"
    strict.write_text(QUICK_LINE_CFG.replace("leakage_tol = 1e-10",
                                             "leakage_tol = 1e-30"))
    rc = main(["line-run", "--config", str(strict), "--out", str(tmp_path / "o")])
    assert rc == 2
    summary = json.loads((tmp_path / "o" / "strict" / "summary.json").read_text())
    assert not summary["all_checks_passed"]


def test_t_end_zero_initial_norms_only(tmp_path, quick_cfg):
    cfg = tmp_path / "t0.cfg"
    cfg.write_text(QUICK_LINE_CFG.replace("t_end = 0.5", "t_end = 0.0")
                   .replace("max_principle = true", "max_principle = false"))
    rc = main(["line-run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 0
    records, _ = read_diagnostics_csv(tmp_path / "o" / "t0" / "diagnostics.csv")
    assert len(records) == 1
    summary = json.loads((tmp_path / "o" / "t0" / "summary.json").read_text())
    assert summary["initial_norms"] == summary["final_norms"]


def test_report_subcommand(tmp_path, quick_cfg, capsys):
    out = tmp_path / "runs"
    main(["line-run", "--config", str(quick_cfg), "--out", str(out)])
    capsys.readouterr()
    rc = main(["report", str(out / "quick")])
    assert rc == 0
    text = capsys.readouterr().out
    assert "decay rate" in text
    assert "check leakage: ok" in text


def test_exact_line_scheme_through_cli(tmp_path):
    cfg = tmp_path / "exact.cfg"
    cfg.write_text(QUICK_LINE_CFG.replace("scheme = if_rk4", "scheme = exact_line")
                   .replace("nonlinear_rel_tol = 1e-12", ""))
    rc = main(["line-run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 0
    summary = json.loads((tmp_path / "o" / "exact" / "summary.json").read_text())
    assert summary["scheme"] == "exact_line"
    assert summary["decay_fits"]["0"]["rate"] == pytest.approx(-0.5, abs=1e-6)


def test_seed_override_changes_hash_not_determinism(tmp_path, quick_cfg):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["line-run", "--config", str(quick_cfg), "--out", str(out1),
                 "--seed", "33"]) == 0
    assert main(["line-run", "--config", str(quick_cfg), "--out", str(out2),
                 "--seed", "33"]) == 0
    csv1 = (out1 / "quick" / "diagnostics.csv").read_bytes()
    csv2 = (out2 / "quick" / "diagnostics.csv").read_bytes()
    assert csv1 == csv2
    s = json.loads((out1 / "quick" / "summary.json").read_text())
    assert s["seed"] == 33


def test_picard_quick(tmp_path):
    cfg = tmp_path / "pic.cfg"
    cfg.write_text("""
[run]
kind = picard
seed = 5
[grid]
N = 6
[field3d]
kind = random
beta = 3.0
amplitude = 0.05
[picard]
eps = 0.1
s = 2.51
n_max = 4
steps = 16
horizon = auto
drift = frozen
[checks]
picard_ratio_max = 0.55
""")
    out = tmp_path / "o"
    rc = main(["picard", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "pic" / "summary.json").read_text())
    assert summary["verdict"] in ("contracting", "fixed_point")
    assert all(r <= 0.55 for r in summary["ratios"])
    assert (out / "pic" / "picard_ratios.csv").exists()


def test_full_run_curved_demo_reports_velocity_ratio(tmp_path):
    cfg = tmp_path / "curved.cfg"
    cfg.write_text("""
[run]
kind = full
seed = 2
[grid]
N = 12
[field3d]
kind = curved
k1_list = 4, 9
amplitude = 0.05
[time]
dt = 0.001
t_end = 0.005
record_every = 1
[analysis]
sobolev_orders = 0
[checks]
enabled = false
""")
    rc = main(["full-run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 0
    summary = json.loads((tmp_path / "o" / "curved" / "summary.json").read_text())
    assert summary["velocity_ratio_l2"] > 1.0


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blow_up_exits_4_with_summary(tmp_path):
    cfg = tmp_path / "blow.cfg"
    cfg.write_text("""
[run]
kind = full
seed = 1
[grid]
N = 8
[field3d]
kind = random
beta = 1.0
amplitude = 1000.0
[time]
dt = 1.0
t_end = 50.0
record_every = 1
[analysis]
sobolev_orders = 0
[checks]
enabled = false
""")
    rc = main(["full-run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 4
    summary = json.loads((tmp_path / "o" / "blow" / "summary.json").read_text())
    assert summary["blow_up_time"] is not None
    assert not summary["all_checks_passed"]


def test_probe_accepts_r_prefix(tmp_path, capsys):
    rc = main(["symbols", "--probe", "r=0.5", "--k1", "64:1024",
               "--out", str(tmp_path)])
    assert rc == 0
    assert "slopes" in capsys.readouterr().out


def test_jobs_fan_out(tmp_path):
    rc = main(["line-run", "--preset", "line-decay-011", "--preset",
               "line-decay-011", "--jobs", "2", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "line-decay-011" / "summary.json").exists()


def test_env_var_output_root(tmp_path, quick_cfg, monkeypatch):
    monkeypatch.setenv("MG_SPECTRAL_OUT", str(tmp_path / "envroot"))
    rc = main(["line-run", "--config", str(quick_cfg)])
    assert rc == 0
    assert (tmp_path / "envroot" / "quick" / "summary.json").exists()
