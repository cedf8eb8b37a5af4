"""
app.py 진입점 테스트.

명령 분기와 예외 종류별 종료 코드를 확인합니다.
"""

import numpy as np
import pytest

from app import main, resolve_config
from core.errors import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK
from presets import preset_path
from storage.trajectories import write_table


def test_presets_command_lists_names(capsys):
    assert main(["presets"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "duffing_clearance" in out
    assert "experimental_mirror" in out


def test_resolve_preset_prefix():
    assert resolve_config("preset:duffing_clearance") == preset_path("duffing_clearance")
    assert resolve_config(None) is None


def test_simulate_command(tmp_path, linear_config):
    out = tmp_path / "sim.csv"
    assert main(["--quiet", "simulate", "--config", str(linear_config), "--out", str(out)]) == EXIT_OK
    assert out.exists()


# ── 종료 코드 ────────────────────────────────────────────────────

def test_missing_config_file_is_io_error(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.toml")]) == EXIT_IO


def test_unknown_preset_is_io_error():
    assert main(["simulate", "--config", "preset:nope"]) == EXIT_IO


def test_bad_config_is_config_error(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("schema_version = 1\n[model]\nmass = 1.0\nspeed = 3\n", encoding="utf-8")
    assert main(["simulate", "--config", str(path)]) == EXIT_CONFIG


def test_missing_input_flag_is_config_error(linear_config):
    assert main(["identify", "--config", str(linear_config)]) == EXIT_CONFIG


def test_bad_threads_env_is_config_error(tmp_path, linear_config, monkeypatch):
    """EDDIKIT_THREADS 가 정수가 아니면 validate 는 종료 코드 2 입니다."""
    traj = tmp_path / "sim.csv"
    assert main(["--quiet", "simulate", "--config", str(linear_config), "--out", str(traj)]) == EXIT_OK
    out = tmp_path / "id"
    args = ["--quiet", "identify", "--config", str(linear_config), "--input", str(traj), "--out", str(out), "--method", "eddi"]
    assert main(args) == EXIT_OK

    monkeypatch.setenv("EDDIKIT_THREADS", "abc")
    code = main(["validate", "--config", str(linear_config), "--input", str(out / "eddi_report.json"), "--out", str(tmp_path / "v")])
    assert code == EXIT_CONFIG


def test_no_crossings_is_numerical_error(tmp_path, linear_config):
    n = 500
    path = write_table(
        tmp_path / "flat.csv",
        {"t": np.arange(n) * 1e-3, "x": np.full(n, -0.02), "v": np.zeros(n), "a": np.zeros(n)},
    )
    code = main(["identify", "--config", str(linear_config), "--input", str(path), "--out", str(tmp_path / "o"), "--method", "eddi"])
    assert code == EXIT_NUMERICAL


def test_spectra_missing_input_is_io_error(tmp_path):
    assert main(["spectra", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")]) == EXIT_IO


def test_malformed_input_is_io_error(tmp_path, linear_config):
    path = tmp_path / "broken.csv"
    path.write_text("t,x,v,a\n0,0,1,0\n0.1,oops,1,0\n", encoding="utf-8")
    assert main(["identify", "--config", str(linear_config), "--input", str(path), "--out", str(tmp_path / "o")]) == EXIT_IO


def test_unknown_command_exits_via_argparse():
    with pytest.raises(SystemExit):
        main(["fly"])
