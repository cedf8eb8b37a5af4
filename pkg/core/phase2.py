"""
Phase 2: 힘 평형으로 보존력을 구하고 강성 모델을 회귀합니다.

    K(t) = F(t) − B(x, ẋ) − ṗ,   ṗ = m ẍ
    K(t) ≈ Θ(x) k

식별된 감쇠 모델과 가속도 채널만으로 보존력을 얻으므로 라그랑지안의 수치 미분이 필요 없습니다.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from core.errors import MissingAcceleration
from core.models import BasisTerm, ModelSpec, Trajectory
from core.phase1 import CONDITION_WARN, validate_library, solve_linear_ls
from utils.logger import get_logger

log = get_logger("Phase2")

# 복원력 그림용 출력 샘플 수 상한
RESTORING_FORCE_POINTS = 4000


@dataclass(frozen=True, eq=False)
class ConservativeForceSeries:
    """시간축, 보존력 K (N), 같은 샘플의 변위 x (m)."""

    times: np.ndarray
    K: np.ndarray
    x: np.ndarray

    def __len__(self) -> int:
        return self.K.size

    def after(self, t_min: float) -> ConservativeForceSeries:
        keep = self.times >= t_min
        return ConservativeForceSeries(self.times[keep], self.K[keep], self.x[keep])


@dataclass(frozen=True, eq=False)
class Phase2System:
    Theta: np.ndarray
    target: np.ndarray
    library: tuple[BasisTerm, ...]


@dataclass(frozen=True, eq=False)
class StiffnessFit:
    terms: tuple[tuple[BasisTerm, float], ...]
    residual_norm: float
    relative_residual: float
    condition_estimate: float
    n_rows: int
    restoring_force: np.ndarray  # (n, 3): x, K_data, K_model (x 오름차순)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms])


def conservative_force(
    traj: Trajectory,
    damping: Sequence[tuple[BasisTerm, float]],
) -> ConservativeForceSeries:
    """
    K(t) = f_ext(t) − B(x(t), ẋ(t)) − m a(t).

    Raises:
        MissingAcceleration: 궤적에 가속도 채널이 없을 때.
    """
    if traj.a is None:
        raise MissingAcceleration("보존력 계산에는 가속도 채널이 필요합니다")
    model = ModelSpec(traj.mass, tuple(damping))
    B = model.damping_force(traj.x, traj.v) if model.damping_terms else 0.0
    K = traj.f_ext - B - traj.momentum_rate
    return ConservativeForceSeries(times=traj.times, K=np.asarray(K, dtype=float), x=traj.x.copy())


def assemble_phase2(series: ConservativeForceSeries, library: Sequence[BasisTerm]) -> Phase2System:
    library = validate_library(library, velocity=False, role="강성")
    Theta = np.column_stack([np.broadcast_to(term.evaluate(series.x, 0.0), series.x.shape) for term in library])
    return Phase2System(Theta=Theta, target=series.K, library=library)


def _restoring_force_samples(series: ConservativeForceSeries, model: ModelSpec) -> np.ndarray:
    step = max(1, len(series) // RESTORING_FORCE_POINTS)
    x = series.x[::step]
    order = np.argsort(x, kind="stable")
    x = x[order]
    k_data = series.K[::step][order]
    k_model = np.asarray(model.stiffness_force(x), dtype=float)
    return np.column_stack([x, k_data, k_model])


def identify_stiffness(
    series: ConservativeForceSeries,
    library: Sequence[BasisTerm],
    t_min: float | None = None,
) -> StiffnessFit:
    """
    Θ(x) k = K 를 모든 샘플 행으로 풀어 강성 계수를 구합니다.

    Args:
        series: conservative_force 결과.
        library: 변위 전용 후보 항.
        t_min: 이 시각 이전 샘플 제외 (충격 구간을 Phase 1 과 같이 잘라낼 때).

    Returns:
        StiffnessFit: 항-계수, 잔차, 조건수, 복원력 그림용 (x, K_data, K_model) 샘플.
    """
    if t_min is not None:
        series = series.after(t_min)
    log.start(f"강성 모델 식별 (후보 {len(library)}개, 샘플 {len(series)}개)")
    system = assemble_phase2(series, library)
    result = solve_linear_ls(system.Theta, system.target)
    if result.condition_estimate > CONDITION_WARN:
        log.warn("풀이", f"조건수 {result.condition_estimate:.3e} > {CONDITION_WARN:.0e}")

    terms = tuple(zip(system.library, result.coefficients.tolist()))
    model = ModelSpec(1.0, (), terms)
    target_norm = float(np.linalg.norm(system.target))
    fit = StiffnessFit(
        terms=terms,
        residual_norm=result.residual_norm,
        relative_residual=result.residual_norm / target_norm if target_norm > 0 else 0.0,
        condition_estimate=result.condition_estimate,
        n_rows=system.Theta.shape[0],
        restoring_force=_restoring_force_samples(series, model),
    )
    log.coefficients(fit.terms)
    log.finish(f"강성 모델 식별 (상대 잔차 {fit.relative_residual:.3e})")
    return fit


def scan_clearance(
    series: ConservativeForceSeries,
    library: Sequence[BasisTerm],
    candidates: Sequence[float],
    t_min: float | None = None,
) -> tuple[float, list[tuple[float, float]]]:
    """
    간극 e 를 모를 때의 1차원 격자 탐색 (확장 기능, 기본 꺼짐).

    라이브러리의 모든 게이트 항 clearance 를 후보값으로 바꿔 Phase 2 잔차가 최소인 e 를 고릅니다.

    Returns:
        (최적 e, [(e, 상대 잔차), ...])
    """
    if t_min is not None:
        series = series.after(t_min)
    scores: list[tuple[float, float]] = []
    log.start(f"간극 탐색 (후보 {len(candidates)}개)")
    target_norm = float(np.linalg.norm(series.K)) or 1.0
    for e in candidates:
        lib = [term.with_clearance(e) for term in library]
        system = assemble_phase2(series, lib)
        result = solve_linear_ls(system.Theta, system.target)
        scores.append((float(e), result.residual_norm / target_norm))
    best = min(scores, key=lambda s: s[1])[0]
    log.finish(f"간극 탐색: e = {best:g} m")
    return best, scores


def compose_model(
    mass: float,
    damping: Sequence[tuple[BasisTerm, float]],
    stiffness: Sequence[tuple[BasisTerm, float]],
) -> ModelSpec:
    """운동량 변화율 + 감쇠 모델 + 강성 모델을 합친 운동방정식."""
    return ModelSpec(mass, tuple(damping), tuple(stiffness))


def decompose_model(spec: ModelSpec) -> tuple[float, tuple, tuple]:
    return spec.mass, spec.damping_terms, spec.stiffness_terms
