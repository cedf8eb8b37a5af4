"""
식별 파이프라인.

EDDI:  교차점 → 트리밍 → Phase 1 감쇠 식별 → 보존력 → Phase 2 강성 식별 → 모델 합성
SINDy: 합친 라이브러리로 STLS
검증:  식별 모델과 기준 모델을 여러 초기조건에서 다시 시뮬레이션해 NRMSE 비교
"""

from __future__ import annotations

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from core.errors import InvalidModel
from core.models import BasisTerm, ModelSpec, Trajectory
from core.phase1 import DampingFit, identify_damping
from core.phase2 import (
    ConservativeForceSeries,
    StiffnessFit,
    compose_model,
    conservative_force,
    identify_stiffness,
    scan_clearance,
)
from core.preprocess import (
    DEFAULT_ENERGY_FLOOR,
    DEFAULT_FORCE_THRESHOLD,
    CrossingSet,
    EnergyTrace,
    dissipated_energy_of_model,
    find_zero_crossings,
    trim_crossings,
)
from core.simulator import SimConfig, simulate
from core.sindy import SindyFit, StlsConfig, sindy_identify
from utils.logger import get_logger

log = get_logger("Pipeline")


# ── EDDI ─────────────────────────────────────────────────────────


@dataclass(frozen=True)
class EddiOptions:
    force_threshold: float = DEFAULT_FORCE_THRESHOLD
    energy_floor: float = DEFAULT_ENERGY_FLOOR
    crossing_t_end: float | None = None
    coefficient_threshold: float = 0.0
    clearance_candidates: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class EddiResult:
    model: ModelSpec
    damping: DampingFit
    stiffness: StiffnessFit
    crossings: CrossingSet
    energy: EnergyTrace
    force: ConservativeForceSeries
    clearance_scan: tuple[tuple[float, float], ...] = ()


def run_eddi(
    traj: Trajectory,
    damping_library: Sequence[BasisTerm],
    stiffness_library: Sequence[BasisTerm],
    options: EddiOptions | None = None,
) -> EddiResult:
    """
    EDDI(mEDDI) 전체 식별.

    외력이 있으면 γ_0 를 외력 종료 뒤 첫 교차점으로 잡고, Phase 2 도 γ_0 이후 샘플만 씁니다.
    clearance_candidates 가 주어지면 강성 회귀 전에 간극 e 를 격자 탐색으로 고릅니다.
    """
    options = options or EddiOptions()
    log.start(f"EDDI 식별 ({len(traj)} 샘플, fs={traj.fs:g} Hz)")

    all_crossings = find_zero_crossings(traj.signal("x"), traj.signal("v"), traj.mass)
    crossings = trim_crossings(
        all_crossings,
        f_ext=traj.signal("f_ext") if traj.is_forced else None,
        force_threshold=options.force_threshold,
        energy_floor=options.energy_floor,
        t_end=options.crossing_t_end,
    )
    log.ok("교차점", f"{len(all_crossings)}개 중 {len(crossings)}개 사용, γ0={crossings.gammas[0]:.6g}s")

    damping = identify_damping(traj, crossings, list(damping_library), options.coefficient_threshold)
    energy = dissipated_energy_of_model(traj, damping.terms, crossings)

    series = conservative_force(traj, damping.terms)
    t_min = float(crossings.gammas[0]) if traj.is_forced else None

    library = list(stiffness_library)
    scan: list[tuple[float, float]] = []
    if options.clearance_candidates:
        best, scan = scan_clearance(series, library, options.clearance_candidates, t_min=t_min)
        library = [term.with_clearance(best) for term in library]

    stiffness = identify_stiffness(series, library, t_min=t_min)
    model = compose_model(traj.mass, damping.terms, stiffness.terms)
    log.finish("EDDI 식별")
    return EddiResult(
        model=model,
        damping=damping,
        stiffness=stiffness,
        crossings=crossings,
        energy=energy,
        force=series,
        clearance_scan=tuple(scan),
    )


# ── SINDy ────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class SindyResult:
    model: ModelSpec
    fit: SindyFit


def run_sindy(traj: Trajectory, library: Sequence[BasisTerm], cfg: StlsConfig | None = None) -> SindyResult:
    fit = sindy_identify(traj, library, cfg)
    model = compose_model(traj.mass, fit.damping_terms, fit.stiffness_terms)
    return SindyResult(model=model, fit=fit)


# ── 검증 ─────────────────────────────────────────────────────────


def nrmse(predicted: np.ndarray, reference: np.ndarray) -> float:
    """RMS(predicted − reference) / RMS(reference). 기준 신호가 0이면 0/∞ 규칙."""
    predicted = np.asarray(predicted, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if predicted.shape != reference.shape:
        raise InvalidModel(f"NRMSE 길이 불일치: {predicted.shape} vs {reference.shape}")
    err = float(np.sqrt(np.mean((predicted - reference) ** 2)))
    ref = float(np.sqrt(np.mean(reference**2)))
    if ref == 0.0:
        return 0.0 if err == 0.0 else float("inf")
    return err / ref


@dataclass(frozen=True, eq=False)
class ValidationCase:
    ic: tuple[float, float]
    identified: Trajectory
    reference: Trajectory | None
    nrmse: float | None


def _validate_one(identified: ModelSpec, reference: ModelSpec | None, cfg: SimConfig) -> ValidationCase:
    traj_id = simulate(identified, cfg)
    if reference is None:
        return ValidationCase(ic=cfg.ic, identified=traj_id, reference=None, nrmse=None)
    traj_ref = simulate(reference, cfg)
    return ValidationCase(ic=cfg.ic, identified=traj_id, reference=traj_ref, nrmse=nrmse(traj_id.x, traj_ref.x))


def validate_model(
    identified: ModelSpec,
    reference: ModelSpec | None,
    sim: SimConfig,
    ics: Sequence[tuple[float, float]],
    threads: int = 1,
) -> list[ValidationCase]:
    """
    초기조건마다 식별 모델(과 기준 모델)을 시뮬레이션해 변위 NRMSE 를 계산합니다.

    초기조건들은 서로 독립이므로 threads 개 작업자로 동시에 돌립니다. 결과 순서는 ics 순서입니다.
    """
    if threads < 1:
        raise InvalidModel(f"threads 는 1 이상이어야 합니다 ({threads})")
    cfgs = [sim.with_ic(x0, v0) for x0, v0 in ics]
    log.start(f"교차 초기조건 검증 ({len(cfgs)}개, 작업자 {threads})")
    if threads == 1 or len(cfgs) <= 1:
        cases = [_validate_one(identified, reference, cfg) for cfg in cfgs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cases = list(pool.map(lambda c: _validate_one(identified, reference, c), cfgs))
    for case in cases:
        if case.nrmse is not None:
            log.ok("NRMSE", f"ic={case.ic}: {case.nrmse:.3%}")
    log.finish("교차 초기조건 검증")
    return cases
