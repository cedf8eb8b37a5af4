"""
cli_app/handlers.py 단위 테스트.

simulate / identify / validate / spectra / report 명령의 산출물을 파일 단위로 확인합니다.
"""

import numpy as np
import pandas as pd
import pytest

from cli_app import handlers
from cli_app.run_config import load_run_config
from core.errors import NoCrossings
from presets import preset_path
from storage.reports import EnergyRecord, IdentificationReport, ModelRecord, Provenance, read_report, write_report
from storage.trajectories import read_scalogram, write_table


def _simulate(config, out):
    return handlers.cmd_simulate(config, out / "trajectory.csv")


# ── simulate ─────────────────────────────────────────────────────

def test_simulate_writes_trajectory(tmp_path, linear_config):
    """3초, 5 kHz 설정이면 헤더 + 15001행이 나옵니다."""
    path = _simulate(linear_config, tmp_path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,x,v,a,f_ext"
    assert len(lines) == 1 + 15001


def test_simulate_is_byte_identical(tmp_path, linear_config):
    a = handlers.cmd_simulate(linear_config, tmp_path / "a.csv")
    b = handlers.cmd_simulate(linear_config, tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_simulate_into_directory(tmp_path, linear_config):
    path = handlers.cmd_simulate(linear_config, tmp_path / "run")
    assert path == tmp_path / "run" / handlers.TRAJECTORY_FILE


# ── identify ─────────────────────────────────────────────────────

def test_identify_linear_eddi(tmp_path, linear_config):
    """EDDI 보고서와 복원력·소산에너지 CSV 를 씁니다."""
    traj = _simulate(linear_config, tmp_path)
    out = tmp_path / "id"
    handlers.cmd_identify(linear_config, traj, out, method="eddi")

    report = read_report(out / "eddi_report.json")
    coef = {r.label: r.value for r in report.model.damping + report.model.stiffness}
    assert coef["v"] == pytest.approx(0.5, rel=5e-3)
    assert coef["x"] == pytest.approx(100.0, rel=1e-3)
    assert [r.stage for r in report.residuals] == ["phase1", "phase2"]
    assert report.provenance.timestamps == (0.0, pytest.approx(3.0))
    assert (out / handlers.RESTORING_FORCE_FILE).exists()
    assert (out / handlers.DISSIPATED_ENERGY_FILE).exists()
    assert not (out / "sindy_report.json").exists()


def test_identify_writes_energy_trace(tmp_path, linear_config):
    """energy_trace.csv 는 t,T,D,E 열이고 보고서의 에너지 요약과 맞습니다."""
    traj = _simulate(linear_config, tmp_path)
    out = tmp_path / "id"
    handlers.cmd_identify(linear_config, traj, out, method="eddi")

    df = pd.read_csv(out / handlers.ENERGY_TRACE_FILE)
    assert list(df.columns) == ["t", "T", "D", "E"]
    assert len(df) == 15001

    energy = read_report(out / "eddi_report.json").energy
    assert energy is not None
    assert energy.initial_energy - energy.dissipated == pytest.approx(energy.final_mechanical, rel=1e-9)
    assert df["E"].iloc[-1] == pytest.approx(energy.final_mechanical)
    # 선형 감쇠 b/m = 0.5: 역학 에너지는 평균적으로 exp(−0.5 t) 로 줄어듭니다
    expected = energy.initial_energy * np.exp(-0.5 * (3.0 - energy.gamma0))
    assert energy.final_mechanical == pytest.approx(expected, rel=0.05)
    after = df[df["t"] >= energy.gamma0]
    assert np.all(after["E"] >= after["T"] - 1e-2 * energy.initial_energy)


def test_identify_is_deterministic(tmp_path, linear_config):
    traj = _simulate(linear_config, tmp_path)
    handlers.cmd_identify(linear_config, traj, tmp_path / "a")
    handlers.cmd_identify(linear_config, traj, tmp_path / "b")
    for name in ("eddi_report.json", "sindy_report.json", handlers.RESTORING_FORCE_FILE):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_identify_sindy_only_skips_phase_artifacts(tmp_path, linear_config):
    traj = _simulate(linear_config, tmp_path)
    out = tmp_path / "id"
    handlers.cmd_identify(linear_config, traj, out, method="sindy")
    assert (out / "sindy_report.json").exists()
    assert not (out / handlers.RESTORING_FORCE_FILE).exists()
    assert not (out / "eddi_report.json").exists()


def test_identify_constant_signal_has_no_crossings(tmp_path, linear_config):
    """변위가 한 번도 0을 지나지 않으면 NoCrossings 이고 보고서를 쓰지 않습니다."""
    n = 1000
    path = write_table(
        tmp_path / "flat.csv",
        {"t": np.arange(n) * 1e-3, "x": np.full(n, 0.01), "v": np.zeros(n), "a": np.zeros(n)},
    )
    out = tmp_path / "id"
    with pytest.raises(NoCrossings) as exc_info:
        handlers.cmd_identify(linear_config, path, out, method="eddi")
    assert exc_info.value.hint
    assert exc_info.value.hint in str(exc_info.value)
    assert not (out / "eddi_report.json").exists()


@pytest.mark.slow
def test_identify_duffing_preset(tmp_path, duffing_trajectory_csv):
    """간극 Duffing 기준 궤적에서 두 방법의 보고서와 그림이 모두 나옵니다."""
    out = tmp_path / "duffing"
    handlers.cmd_identify(preset_path("duffing_clearance"), duffing_trajectory_csv, out)
    eddi = read_report(out / "eddi_report.json")
    sindy = read_report(out / "sindy_report.json")
    assert eddi.method == "eddi"
    assert sindy.iterations >= 1
    coef = {r.label: r.value for r in eddi.model.stiffness}
    assert coef["x"] == pytest.approx(40.0, rel=0.005)
    assert (out / "restoring_force.svg").exists()
    assert (out / "energy_trace.svg").exists()


# ── validate ─────────────────────────────────────────────────────

def _exact_report(config, out):
    cfg = load_run_config(config)
    report = IdentificationReport(
        method="eddi",
        model=ModelRecord.from_spec(cfg.to_model_spec()),
        provenance=Provenance(config_sha256="0" * 64, input_sha256="0" * 64, timestamps=(0.0, 3.0)),
    )
    return write_report(report, out / "eddi_report.json")


def test_validate_exact_model(tmp_path, linear_config, monkeypatch):
    """식별 모델이 정답이면 모든 검증 초기조건의 NRMSE 가 0 입니다."""
    monkeypatch.setenv("EDDIKIT_THREADS", "2")
    report_path = _exact_report(linear_config, tmp_path / "in")
    out = tmp_path / "val"
    handlers.cmd_validate(report_path, linear_config, out)

    metrics = pd.read_csv(out / "eddi_validation_metrics.csv")
    assert list(metrics["v0"]) == [0.5, 2.0]
    assert np.all(metrics["nrmse"] == 0.0)
    updated = read_report(out / "eddi_report.json")
    assert [v.ic for v in updated.validation] == [(0.0, 0.5), (0.0, 2.0)]
    assert (out / "eddi_validation_0.csv").exists()
    assert (out / "eddi_validation_1.csv").exists()


# ── spectra ──────────────────────────────────────────────────────

def test_spectra_on_tone(tmp_path):
    """8 Hz 정현파의 Fourier 최대와 스칼로그램 능선이 8 Hz 근처입니다."""
    fs = 1000.0
    t = np.arange(5001) / fs
    path = write_table(tmp_path / "tone.csv", {"t": t, "x": np.sin(2 * np.pi * 8.0 * t)})
    out = tmp_path / "spectra"
    handlers.cmd_spectra(path, out)

    spectrum = pd.read_csv(out / handlers.SPECTRUM_FILE)
    assert spectrum["f"][spectrum["magnitude"].idxmax()] == pytest.approx(8.0, abs=0.25)
    freqs, times, magnitude = read_scalogram(out / handlers.SCALOGRAM_FILE)
    assert magnitude.shape == (freqs.size, times.size)
    assert magnitude.max() == 1.0
    ridge = pd.read_csv(out / handlers.RIDGE_FILE)["ridge_hz"].to_numpy()
    middle = ridge[ridge.size // 4: 3 * ridge.size // 4]
    np.testing.assert_allclose(middle, 8.0, rtol=0.05)
    assert (out / "scalogram.svg").exists()


def test_spectra_falls_back_to_acceleration_column(tmp_path):
    fs = 1000.0
    t = np.arange(2001) / fs
    path = write_table(tmp_path / "acc.csv", {"t": t, "a": np.sin(2 * np.pi * 20.0 * t)})
    written = handlers.cmd_spectra(path, tmp_path / "spectra")
    assert tmp_path / "spectra" / handlers.SPECTRUM_FILE in written


# ── report ───────────────────────────────────────────────────────

def test_report_summary_table(tmp_path, linear_config):
    """정답 모델과 나란히 놓은 Markdown 비교표를 씁니다."""
    _exact_report(linear_config, tmp_path)
    target = handlers.cmd_report(tmp_path, config_path=linear_config)
    assert target == tmp_path / handlers.SUMMARY_FILE
    text = target.read_text(encoding="utf-8")
    assert "## EDDI" in text
    assert "| damping | `v` | N*s/m | 0.5 | 0.5 | 0.000 |" in text


def test_report_summary_lists_energy_budget(tmp_path, linear_config):
    """보고서에 에너지 요약이 있으면 표 아래에 한 줄로 씁니다."""
    path = _exact_report(linear_config, tmp_path)
    report = read_report(path).model_copy(
        update={"energy": EnergyRecord(gamma0=0.0, initial_energy=0.5, dissipated=0.4, final_mechanical=0.1)}
    )
    write_report(report, path)
    text = handlers.cmd_report(tmp_path).read_text(encoding="utf-8")
    assert "T(γ0) = 0.5 J, 소산 = 0.4 J, E(tN) = 0.1 J" in text


def test_report_without_reports(tmp_path):
    with pytest.raises(FileNotFoundError):
        handlers.cmd_report(tmp_path)


# ── 가속도 입력 ──────────────────────────────────────────────────

def test_acceleration_csv_is_reconstructed(tmp_path, linear_config):
    """t,a CSV 는 적분 + 고역통과로 x, v 를 복원한 궤적이 됩니다."""
    fs = 5_000.0
    t = np.arange(int(6 * fs) + 1) / fs
    w = 2 * np.pi * 8.0
    x = 0.01 * np.exp(-0.3 * t) * np.sin(w * t)
    a = 0.01 * np.exp(-0.3 * t) * ((0.09 - w**2) * np.sin(w * t) - 0.6 * w * np.cos(w * t))
    path = write_table(tmp_path / "acc.csv", {"t": t, "a": a})

    traj = handlers.load_identification_input(load_run_config(linear_config), path)
    n = t.size
    core = slice(n // 10, n - n // 10)
    err = np.sqrt(np.mean((traj.x[core] - x[core]) ** 2)) / np.sqrt(np.mean(x[core] ** 2))
    assert err < 0.02
    assert traj.mass == 1.0
    np.testing.assert_array_equal(traj.a, a)
