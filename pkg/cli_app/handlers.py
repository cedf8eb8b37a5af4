"""
CLI 명령 핸들러.

simulate → identify → validate → spectra → report 순서의 배치 작업을 하나씩 수행합니다.
각 핸들러는 계산을 모두 끝낸 뒤에 파일을 쓰고, 쓴 경로를 돌려줍니다.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from cli_app import plots
from cli_app.run_config import RunConfig, load_run_config
from core.errors import DataFormatError, InvalidModel
from core.models import ModelSpec, SampledSignal, Trajectory
from core.pipeline import EddiResult, SindyResult, run_eddi, run_sindy, validate_model
from core.preprocess import reconstruct_states
from core.simulator import simulate
from core.spectra import DEFAULT_OMEGA0, cwt_morlet, fourier_spectrum, scalogram_ridge
from storage.reports import (
    EnergyRecord,
    IdentificationReport,
    ModelRecord,
    Provenance,
    ResidualRecord,
    ValidationRecord,
    finite_or_none,
    list_reports,
    read_report,
    sha256_of,
    write_report,
)
from storage.trajectories import (
    is_trajectory_file,
    read_acceleration,
    read_table,
    read_trajectory,
    write_scalogram,
    write_table,
    write_trajectory,
)
from utils.config import load_config
from utils.logger import get_logger

log = get_logger("Handlers")

TRAJECTORY_FILE = "trajectory.csv"
RESTORING_FORCE_FILE = "restoring_force.csv"
DISSIPATED_ENERGY_FILE = "dissipated_energy.csv"
ENERGY_TRACE_FILE = "energy_trace.csv"
CLEARANCE_SCAN_FILE = "clearance_scan.csv"
SPECTRUM_FILE = "spectrum.csv"
SCALOGRAM_FILE = "scalogram.csv"
COI_FILE = "scalogram_coi.csv"
RIDGE_FILE = "scalogram_ridge.csv"
SUMMARY_FILE = "summary.md"


def report_file_name(method: str) -> str:
    return f"{method}_report.json"


# ── 헬퍼 ────────────────────────────────────────────────────────────


def _out_dir(cfg: RunConfig | None, out: Path | None) -> Path:
    directory = Path(out) if out is not None else Path(cfg.output.directory if cfg else "out")
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def load_identification_input(cfg: RunConfig, path: Path) -> Trajectory:
    """
    궤적 CSV 또는 가속도 CSV 를 식별 입력 궤적으로 읽습니다.

    가속도 CSV 이거나 preprocess.reconstruct 가 켜져 있으면 적분 + 고역통과로 x, v 를 재구성합니다.
    """
    pre = cfg.preprocess
    if is_trajectory_file(path):
        traj = read_trajectory(path, cfg.model.mass)
        if not pre.reconstruct:
            return traj
        log.step("입력", "궤적 CSV 의 가속도 채널만 사용해 상태를 재구성합니다")
        a = traj.signal("a")
        f_ext = traj.signal("f_ext") if traj.is_forced else None
    else:
        log.step("입력", "가속도 CSV: 상태를 재구성합니다")
        a, f_ext = read_acceleration(path)
    return reconstruct_states(a, cfg.model.mass, pre.filter_order, pre.cutoff_hz, f_ext=f_ext)


def _provenance(config_path: Path, input_path: Path, traj: Trajectory) -> Provenance:
    return Provenance(
        config_sha256=sha256_of(config_path),
        input_sha256=sha256_of(input_path),
        timestamps=(float(traj.t0), float(traj.times[-1])),
    )


def _energy_record(result: EddiResult) -> EnergyRecord:
    """γ_0 부터 기록 끝까지 식별 모델의 에너지 수지."""
    trace = result.energy
    g0 = float(result.crossings.gammas[0])
    initial = float(result.crossings.T_at_gamma[0])
    dissipated = float(trace.dissipated[-1] - np.interp(g0, trace.times, trace.dissipated))
    return EnergyRecord(
        gamma0=g0,
        initial_energy=initial,
        dissipated=dissipated,
        final_mechanical=float(trace.mechanical[-1]),
    )


def _eddi_report(result: EddiResult, provenance: Provenance) -> IdentificationReport:
    damping, stiffness = result.damping, result.stiffness
    return IdentificationReport(
        method="eddi",
        model=ModelRecord.from_spec(result.model),
        residuals=[
            ResidualRecord(
                stage="phase1",
                residual_norm=damping.residual_norm,
                relative_residual=damping.relative_residual,
                condition_estimate=finite_or_none(damping.condition_estimate),
                n_rows=damping.n_equations,
            ),
            ResidualRecord(
                stage="phase2",
                residual_norm=stiffness.residual_norm,
                relative_residual=stiffness.relative_residual,
                condition_estimate=finite_or_none(stiffness.condition_estimate),
                n_rows=stiffness.n_rows,
            ),
        ],
        provenance=provenance,
        thresholded=list(damping.thresholded),
        clearance_scan=[list(s) for s in result.clearance_scan],
        energy=_energy_record(result),
    )


def _sindy_report(result: SindyResult, provenance: Provenance, n_rows: int) -> IdentificationReport:
    fit = result.fit
    return IdentificationReport(
        method="sindy",
        model=ModelRecord.from_spec(result.model),
        residuals=[
            ResidualRecord(
                stage="stls",
                residual_norm=fit.residual_norm,
                relative_residual=fit.relative_residual,
                condition_estimate=finite_or_none(fit.condition_estimate),
                n_rows=n_rows,
            )
        ],
        provenance=provenance,
        iterations=fit.iterations,
    )


def _write_eddi_artifacts(result: EddiResult, out: Path, with_plots: bool) -> list[Path]:
    rf = result.stiffness.restoring_force
    energy = result.damping.energy
    trace = result.energy
    written = [
        write_table(out / RESTORING_FORCE_FILE, {"x": rf[:, 0], "K_data": rf[:, 1], "K_model": rf[:, 2]}),
        write_table(
            out / DISSIPATED_ENERGY_FILE,
            {
                "gamma": energy.gammas,
                "T_gamma": result.crossings.T_at_gamma[1:],
                "dissipated_data": energy.data,
                "dissipated_model": energy.model,
            },
        ),
        write_table(
            out / ENERGY_TRACE_FILE,
            {"t": trace.times, "T": trace.kinetic, "D": trace.dissipated, "E": trace.mechanical},
        ),
    ]
    if result.clearance_scan:
        scan = np.array(result.clearance_scan)
        written.append(write_table(out / CLEARANCE_SCAN_FILE, {"clearance": scan[:, 0], "relative_residual": scan[:, 1]}))
    if with_plots:
        written.append(plots.plot_restoring_force(rf[:, 0], rf[:, 1], rf[:, 2], out / "restoring_force.svg"))
        written.append(plots.plot_dissipated_energy(energy.gammas, energy.data, energy.model, out / "dissipated_energy.svg"))
        written.append(
            plots.plot_energy_trace(
                trace.times, trace.kinetic, trace.mechanical, result.crossings.gammas[0], out / "energy_trace.svg"
            )
        )
    return written


# ── simulate ────────────────────────────────────────────────────────


def cmd_simulate(config_path: Path, out: Path | None = None) -> Path:
    """
    설정의 정답 모델을 시뮬레이션해 궤적 CSV(t,x,v,a,f_ext)를 씁니다.

    out 이 .csv 로 끝나면 그 파일에, 아니면 디렉터리/trajectory.csv 에 씁니다.
    """
    cfg = load_run_config(config_path)
    log.start(f"simulate: {config_path}")
    spec = cfg.to_model_spec()
    traj = simulate(spec, cfg.sim_config())
    if out is not None and Path(out).suffix == ".csv":
        path = write_trajectory(traj, Path(out))
    else:
        path = write_trajectory(traj, _out_dir(cfg, out) / TRAJECTORY_FILE)
    log.finish(f"simulate → {path}")
    return path


# ── identify ────────────────────────────────────────────────────────


def cmd_identify(config_path: Path, input_path: Path, out: Path | None = None, method: str | None = None) -> list[Path]:
    """
    궤적에서 운동방정식을 식별해 방법별 보고서 JSON 과 그림 데이터를 씁니다.

    EDDI 는 restoring_force.csv, dissipated_energy.csv, energy_trace.csv 도 씁니다.
    SINDy 만 고르면 Phase 1/2 산출물은 쓰지 않습니다.
    """
    cfg = load_run_config(config_path)
    if method is None:
        methods = cfg.methods()
    else:
        methods = ["eddi", "sindy"] if method == "both" else [method]
    out_dir = _out_dir(cfg, out)
    log.start(f"identify: {input_path} ({', '.join(methods)})")
    traj = load_identification_input(cfg, Path(input_path))
    provenance = _provenance(Path(config_path), Path(input_path), traj)

    damping_library = cfg.damping_library()
    stiffness_library = cfg.stiffness_library()

    # 계산을 모두 마친 뒤에 씁니다
    eddi: EddiResult | None = None
    sindy: SindyResult | None = None
    if "eddi" in methods:
        eddi = run_eddi(traj, damping_library, stiffness_library, cfg.eddi_options())
    if "sindy" in methods:
        sindy = run_sindy(traj, damping_library + stiffness_library, cfg.stls_config())

    written: list[Path] = []
    if eddi is not None:
        written.append(write_report(_eddi_report(eddi, provenance), out_dir / report_file_name("eddi")))
        written += _write_eddi_artifacts(eddi, out_dir, cfg.output.plots)
    if sindy is not None:
        written.append(write_report(_sindy_report(sindy, provenance, len(traj)), out_dir / report_file_name("sindy")))
    log.finish(f"identify → {out_dir}")
    return written


# ── validate ────────────────────────────────────────────────────────


def cmd_validate(report_path: Path, config_path: Path, out: Path | None = None) -> list[Path]:
    """
    보고서의 식별 모델을 검증 초기조건마다 다시 시뮬레이션해 기준 모델과 비교합니다.

    초기조건별 (t, x_ref, x_id) CSV, NRMSE 표 CSV, 검증 결과를 채운 보고서를 씁니다.
    NRMSE = RMS(x_id − x_ref) / RMS(x_ref), 전체 기록 기준.
    """
    cfg = load_run_config(config_path)
    report = read_report(report_path)
    identified = report.to_model_spec()
    if identified.mass != cfg.model.mass:
        log.warn("검증", f"보고서 질량 {identified.mass:g} ≠ 설정 질량 {cfg.model.mass:g}")
    reference = cfg.reference_model()
    if reference is None:
        log.warn("검증", "설정에 정답 모델 항이 없어 식별 모델만 시뮬레이션합니다")
    ics = [tuple(ic) for ic in cfg.validation.ics] or [cfg.sim_config().ic]
    settings = load_config()

    out_dir = _out_dir(cfg, out)
    log.start(f"validate: {report_path} ({len(ics)} 초기조건)")
    cases = validate_model(identified, reference, cfg.sim_config(), ics, threads=settings.threads)

    written: list[Path] = []
    records: list[ValidationRecord] = []
    for i, case in enumerate(cases):
        columns = {"t": case.identified.times}
        if case.reference is not None:
            columns["x_ref"] = case.reference.x
        columns["x_id"] = case.identified.x
        path = out_dir / f"{report.method}_validation_{i}.csv"
        written.append(write_table(path, columns))
        if cfg.output.plots:
            written.append(
                plots.plot_validation(
                    case.identified.times,
                    None if case.reference is None else case.reference.x,
                    case.identified.x,
                    path.with_suffix(".svg"),
                    title=f"ic = ({case.ic[0]:g}, {case.ic[1]:g})",
                )
            )
        records.append(ValidationRecord(ic=case.ic, nrmse=finite_or_none(case.nrmse)))

    scored = [c for c in cases if c.nrmse is not None]
    if scored:
        written.append(
            write_table(
                out_dir / f"{report.method}_validation_metrics.csv",
                {
                    "x0": [c.ic[0] for c in scored],
                    "v0": [c.ic[1] for c in scored],
                    "nrmse": [c.nrmse for c in scored],
                },
            )
        )
    updated = report.model_copy(update={"validation": records})
    written.append(write_report(updated, out_dir / report_file_name(report.method)))
    log.finish(f"validate → {out_dir}")
    return written


# ── spectra ─────────────────────────────────────────────────────────


def _spectra_signal(input_path: Path, channel: str) -> SampledSignal:
    frame = read_table(input_path)
    if "t" not in frame.columns:
        raise DataFormatError(f"{input_path}: 't' 열이 없습니다")
    if channel not in frame.columns:
        fallback = next((c for c in ("x", "a") if c in frame.columns), None)
        if fallback is None:
            value_columns = [c for c in frame.columns if c != "t"]
            if not value_columns:
                raise DataFormatError(f"{input_path}: 신호 열이 없습니다")
            fallback = value_columns[0]
        log.warn("스펙트럼", f"{channel} 열이 없어 {fallback} 열을 씁니다")
        channel = fallback
    t = frame["t"].to_numpy()
    if t.size < 2:
        raise DataFormatError(f"{input_path}: 샘플이 2개 이상 필요합니다")
    dt = (t[-1] - t[0]) / (t.size - 1)
    try:
        return SampledSignal(float(t[0]), float(dt), frame[channel].to_numpy())
    except InvalidModel as e:
        raise DataFormatError(f"{input_path}: {e}") from None


def cmd_spectra(input_path: Path, out: Path | None = None, config_path: Path | None = None) -> list[Path]:
    """
    Fourier 스펙트럼(f, magnitude)과 Morlet 스칼로그램 격자 CSV 를 씁니다.

    스칼로그램과 함께 영향 원뿔(t, coi_hz)과 능선(t, ridge_hz)도 씁니다.
    """
    cfg = load_run_config(config_path) if config_path is not None else None
    output = cfg.output if cfg is not None else None
    channel = output.spectra_channel if output else "x"
    y = _spectra_signal(Path(input_path), channel)

    log.start(f"spectra: {input_path} ({len(y)} 샘플)")
    freqs, magnitude = fourier_spectrum(y)
    scalogram = cwt_morlet(
        y,
        omega0=output.omega0 if output else DEFAULT_OMEGA0,
        max_time_points=output.scalogram_time_points if output else 2000,
    )
    ridge = scalogram_ridge(scalogram)

    out_dir = _out_dir(cfg, out)
    written = [
        write_table(out_dir / SPECTRUM_FILE, {"f": freqs, "magnitude": magnitude}),
        write_scalogram(scalogram, out_dir / SCALOGRAM_FILE),
        write_table(out_dir / COI_FILE, {"t": scalogram.times, "coi_hz": scalogram.coi}),
        write_table(out_dir / RIDGE_FILE, {"t": scalogram.times, "ridge_hz": ridge}),
    ]
    if output is None or output.plots:
        written.append(plots.plot_spectrum(freqs, magnitude, out_dir / "spectrum.svg"))
        written.append(
            plots.plot_scalogram(scalogram.freqs, scalogram.times, scalogram.magnitude, out_dir / "scalogram.svg", scalogram.coi)
        )
    log.finish(f"spectra → {out_dir}")
    return written


# ── report ──────────────────────────────────────────────────────────


def _term_key(record) -> tuple:
    return (record.kind, record.power, record.clearance)


def render_comparison(reports: list[IdentificationReport], reference: ModelSpec | None) -> str:
    """
    방법별 식별 계수를 정답 계수와 나란히 놓은 Markdown 표.

    정답 모델에 없는 항의 정답값은 0, 오차(%)는 정답값이 0이 아닐 때만 씁니다.
    """
    exact: dict[tuple, float] = {}
    if reference is not None:
        for rec in ModelRecord.from_spec(reference).damping + ModelRecord.from_spec(reference).stiffness:
            exact[_term_key(rec)] = rec.value

    lines: list[str] = []
    for report in reports:
        lines.append(f"## {report.method.upper()}")
        lines.append("")
        lines.append("| role | term | unit | exact | identified | error (%) |")
        lines.append("|---|---|---|---|---|---|")
        for role, records in (("damping", report.model.damping), ("stiffness", report.model.stiffness)):
            for rec in records:
                truth = exact.get(_term_key(rec), 0.0) if reference is not None else None
                if truth is None:
                    exact_cell, err_cell = "", ""
                else:
                    exact_cell = f"{truth:.6g}"
                    err_cell = f"{abs(rec.value - truth) / abs(truth) * 100:.3f}" if truth != 0 else ""
                lines.append(f"| {role} | `{rec.label}` | {rec.unit} | {exact_cell} | {rec.value:.6g} | {err_cell} |")
        scored = [v for v in report.validation if v.nrmse is not None]
        if scored:
            lines.append("")
            lines.append("| ic (x0, v0) | NRMSE (%) |")
            lines.append("|---|---|")
            for v in scored:
                lines.append(f"| ({v.ic[0]:g}, {v.ic[1]:g}) | {v.nrmse * 100:.3f} |")
        if report.energy is not None:
            en = report.energy
            lines.append("")
            lines.append(
                f"에너지 (γ0 = {en.gamma0:.4g} s): T(γ0) = {en.initial_energy:.4g} J, "
                f"소산 = {en.dissipated:.4g} J, E(tN) = {en.final_mechanical:.4g} J"
            )
        lines.append("")
    return "\n".join(lines)


def cmd_report(report_dir: Path, out: Path | None = None, config_path: Path | None = None) -> Path:
    """디렉터리의 모든 *_report.json 을 한 Markdown 비교표(summary.md)로 모읍니다."""
    paths = list_reports(Path(report_dir))
    if not paths:
        raise FileNotFoundError(f"{report_dir} 에 *_report.json 이 없습니다")
    cfg = load_run_config(config_path) if config_path is not None else None
    reports = [read_report(p) for p in paths]
    text = render_comparison(reports, cfg.reference_model() if cfg is not None else None)

    target = Path(out) if out is not None else Path(report_dir)
    if target.suffix != ".md":
        target.mkdir(parents=True, exist_ok=True)
        target = target / SUMMARY_FILE
    else:
        target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
    log.ok("저장", str(target))
    return target
