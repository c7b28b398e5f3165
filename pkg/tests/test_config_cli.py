import json

import numpy as np
import pytest

from iondirac.cli import main
from iondirac.config import OUTPUT_ENV, ConfigError, load_config, resolve_output_dir, to_ini
from iondirac.serialize import read_series

FAST = ["--set", "grid.n_points=1024", "--set", "grid.x_min=-30", "--set", "grid.x_max=30"]


def test_defaults():
    cfg = load_config("fig1")
    assert cfg.compton == 1.2 and cfg.omega is None
    assert cfg.mass_term == pytest.approx(cfg.c / 1.2)
    assert cfg.horizon == 250 and cfg.step == 2
    assert cfg.snapshots == (0, 75, 150)
    assert load_config("fig2").momentum == 1.0
    assert load_config("fig3").momentum == 2.2
    assert load_config("sweep").horizon is None


def test_overrides_and_mass_exclusivity():
    cfg = load_config("custom", overrides=["params.omega=0.05", "state.x0=1.5"])
    assert cfg.omega == 0.05 and cfg.compton is None and cfg.x0 == 1.5
    with pytest.raises(ConfigError):
        load_config("custom", overrides=["params.omega=0.05", "params.compton=1.2"])
    with pytest.raises(ConfigError):
        load_config("custom", overrides=["params.compton="])


@pytest.mark.parametrize("bad", [
    "nosection=1", "params.bogus=1", "bogus.key=1", "grid.n_points=1000", "measurement.k_points=60",
    "measurement.seed=none", "experiment.engine=gpu", "time.step=-1", "state.spinor=0, 0",
    "grid.x_max=-100", "measurement.window=kaiser", "params.eta=abc",
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        load_config("fig1", overrides=[bad])


def test_unlimited_shots_need_no_seed():
    cfg = load_config("fig1", overrides=["measurement.shots=none", "measurement.seed=none"])
    assert cfg.shots is None and cfg.seed is None


def test_config_file_and_echo_round_trip(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[experiment]\nname = fig2\n[time]\nhorizon = 20\n")
    cfg = load_config("fig2", path)
    assert cfg.horizon == 20
    echo = tmp_path / "echo.ini"
    echo.write_text(to_ini(cfg))
    assert load_config("fig2", echo) == cfg
    with pytest.raises(ConfigError):
        load_config("fig1", path)
    with pytest.raises(ConfigError):
        load_config("fig1", tmp_path / "missing.ini")


def test_output_dir_resolution(monkeypatch, tmp_path):
    cfg = load_config("fig3")
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    assert resolve_output_dir(cfg) == tmp_path / "fig3"
    assert resolve_output_dir(cfg, tmp_path / "x") == tmp_path / "x"


def test_cli_custom_run_is_deterministic(tmp_path, capsys):
    args = ["custom", *FAST, "--set", "time.horizon=40", "--set", "state.momentum=0.5"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    for name in ("custom_x.csv", "custom_measured.csv", "custom.svg", "report.json", "config.resolved.ini"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    ok = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert ok["status"] == "ok"
    x = read_series(tmp_path / "a" / "custom_x.csv")
    assert list(x) == ["t[us]", "x[Delta]"]


def test_cli_seed_changes_measured_series(tmp_path):
    args = ["custom", *FAST, "--set", "time.horizon=40"]
    main([*args, "--out", str(tmp_path / "a")])
    main([*args, "--set", "measurement.seed=7", "--out", str(tmp_path / "b")])
    a = read_series(tmp_path / "a" / "custom_measured.csv")["x[Delta]"]
    b = read_series(tmp_path / "b" / "custom_measured.csv")["x[Delta]"]
    assert not np.array_equal(a, b)


def test_cli_config_error_exit_2(tmp_path, capsys):
    code = main(["fig2", "--set", "grid.n_points=1000", "--out", str(tmp_path)])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "config" and err["exit_code"] == 2
    assert json.loads((tmp_path / "error.json").read_text())["exit_code"] == 2


def test_cli_truncation_exit_3(tmp_path, capsys):
    code = main(["fig2", "--set", "experiment.engine=fock", "--set", "fock.n_trunc=40", "--out", str(tmp_path)])
    assert code == 3
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "health" and "truncation" in err["message"]


def test_cli_unwritable_output(tmp_path):
    blocker = tmp_path / "f"
    blocker.write_text("")
    assert main(["custom", *FAST, "--out", str(blocker / "sub")]) == 2


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit):
        main([])
