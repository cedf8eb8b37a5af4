"""
Phase 1: 소산 에너지 기반 감쇠 모델 식별.

교차점 γ_i 에서는 위치에너지가 0이므로 역학 에너지 = 운동 에너지입니다.
따라서 감쇠 모델이 [γ_0, γ_i] 동안 소산한 에너지는 T(γ_0) − T(γ_i) 와 같아야 합니다:

    Σ_j b_j ∫_{γ_0}^{γ_i} ẋ B_j dτ = T(γ_0) − T(γ_i),   i = 1..N

이를 Q b = R 로 모아 열 피벗 QR 최소제곱으로 풉니다.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from core.errors import EmptyLibrary, InsufficientCrossings, InvalidModel, NonFiniteInput
from core.models import BasisTerm, Trajectory
from core.preprocess import CrossingSet, interp_at, term_power_integral
from utils.logger import get_logger

log = get_logger("Phase1")

CONDITION_WARN = 1e10


# ── 최소제곱 ──────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class LstsqResult:
    coefficients: np.ndarray
    residual_norm: float
    condition_estimate: float
    rank: int


def solve_linear_ls(A: np.ndarray, y: np.ndarray, scale_columns: bool = True) -> LstsqResult:
    """
    최소 잔차 최소제곱 해를 구합니다.

    열 피벗 직교 분해(LAPACK gelsy)를 쓰므로 랭크 부족 시 최소 노름 해를 돌려줍니다.
    scale_columns 이면 열을 단위 2-노름으로 정규화해 풀고 계수를 되돌립니다
    (해는 같고 조건수만 좋아집니다). 조건수 추정값도 정규화된 행렬 기준입니다.

    Raises:
        NonFiniteInput: A 또는 y 에 NaN/Inf 가 있을 때.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise InvalidModel(f"행렬 크기가 비었습니다 {A.shape}")
    if A.shape[0] != y.size:
        raise InvalidModel(f"행 수 불일치: A {A.shape}, y {y.size}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("최소제곱 입력에 NaN/Inf 가 있습니다")

    scale = np.ones(A.shape[1])
    if scale_columns:
        norms = np.linalg.norm(A, axis=0)
        scale = np.where(norms > 0, norms, 1.0)
    As = A / scale

    sol, _, rank, _ = scipy.linalg.lstsq(As, y, lapack_driver="gelsy")
    coef = sol / scale
    residual = float(np.linalg.norm(A @ coef - y))

    sv = np.linalg.svd(As, compute_uv=False)
    nonzero = sv[sv > 0]
    cond = float(sv[0] / sv[-1]) if nonzero.size == sv.size and sv.size else float("inf")
    return LstsqResult(coefficients=coef, residual_norm=residual, condition_estimate=cond, rank=int(rank))


# ── Phase 1 ───────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class Phase1System:
    """Q (N×M), R (N), 후보 항 목록, 조건수 추정값, 교차점."""

    Q: np.ndarray
    R: np.ndarray
    library: tuple[BasisTerm, ...]
    crossings: CrossingSet
    condition_estimate: float = float("nan")

    @property
    def shape(self) -> tuple[int, int]:
        return self.Q.shape


@dataclass(frozen=True, eq=False)
class EnergyCurves:
    """교차점별 데이터 소산 에너지 R 과 모델 소산 에너지 Q b."""

    gammas: np.ndarray
    data: np.ndarray
    model: np.ndarray


@dataclass(frozen=True, eq=False)
class DampingFit:
    terms: tuple[tuple[BasisTerm, float], ...]
    residual_norm: float
    relative_residual: float
    condition_estimate: float
    n_equations: int
    energy: EnergyCurves
    thresholded: tuple[str, ...] = field(default=())

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms])


def validate_library(library: list[BasisTerm] | tuple[BasisTerm, ...], velocity: bool, role: str) -> tuple[BasisTerm, ...]:
    library = tuple(library)
    if not library:
        raise EmptyLibrary(f"{role} 후보 라이브러리가 비어 있습니다")
    for term in library:
        if term.involves_velocity != velocity:
            raise InvalidModel(f"{role} 라이브러리에 맞지 않는 항: {term.label}")
    if len(set(library)) != len(library):
        raise InvalidModel(f"{role} 라이브러리에 중복 항이 있습니다")
    return library


def assemble_phase1(traj: Trajectory, crossings: CrossingSet, library: list[BasisTerm]) -> Phase1System:
    """
    Q[i][j] = ∫_{γ_0}^{γ_i} ẋ B_j dτ,  R[i] = T(γ_0) − T(γ_i).

    누적 사다리꼴 적분(게이트 개폐 셀은 나눠 적분)을 γ_i 에서 선형 보간하므로
    행 i 의 상한은 R[i] 와 같습니다.

    Raises:
        EmptyLibrary: 라이브러리가 비었을 때.
        InsufficientCrossings: 교차점이 2개 미만일 때.
    """
    library = validate_library(library, velocity=True, role="감쇠")
    if len(crossings) < 2:
        raise InsufficientCrossings(f"교차점 {len(crossings)}개로는 Phase 1 방정식을 만들 수 없습니다")

    times = traj.times
    g = crossings.gammas
    Q = np.empty((g.size - 1, len(library)))
    for j, term in enumerate(library):
        cum = term_power_integral(traj, term)
        at = interp_at(times, cum, g)
        Q[:, j] = at[1:] - at[0]
    R = crossings.dissipated

    n, m = Q.shape
    if n < m:
        log.warn("조립", f"방정식 {n}개 < 미지수 {m}개: 과소결정 시스템입니다")
    return Phase1System(Q=Q, R=R, library=library, crossings=crossings)


def identify_damping(
    traj: Trajectory,
    crossings: CrossingSet,
    library: list[BasisTerm],
    coefficient_threshold: float = 0.0,
) -> DampingFit:
    """
    Phase 1 감쇠 모델을 식별합니다 (assemble_phase1 → solve_linear_ls).

    Args:
        traj: 자유 감쇠 궤적.
        crossings: Phase 1 에 쓸 교차점 (trim_crossings 결과).
        library: 감쇠 후보 항 목록.
        coefficient_threshold: |b_j| 가 이보다 작으면 0으로 보고 (기본 0 = 끔).

    Returns:
        DampingFit: 항-계수 목록, 잔차, 조건수, 교차점별 소산 에너지 비교 곡선.
    """
    log.start(f"감쇠 모델 식별 (후보 {len(library)}개, 교차점 {len(crossings)}개)")
    system = assemble_phase1(traj, crossings, library)
    log.ok("조립", f"Q: {system.Q.shape[0]}×{system.Q.shape[1]}")

    result = solve_linear_ls(system.Q, system.R)
    if result.condition_estimate > CONDITION_WARN:
        log.warn("풀이", f"조건수 {result.condition_estimate:.3e} > {CONDITION_WARN:.0e}")

    coef = result.coefficients.copy()
    dropped: list[str] = []
    if coefficient_threshold > 0:
        small = np.abs(coef) < coefficient_threshold
        dropped = [system.library[j].label for j in np.flatnonzero(small)]
        coef[small] = 0.0

    r_norm = float(np.linalg.norm(system.R))
    residual = float(np.linalg.norm(system.Q @ coef - system.R))
    fit = DampingFit(
        terms=tuple(zip(system.library, coef.tolist())),
        residual_norm=residual,
        relative_residual=residual / r_norm if r_norm > 0 else 0.0,
        condition_estimate=result.condition_estimate,
        n_equations=system.Q.shape[0],
        energy=EnergyCurves(gammas=crossings.gammas[1:], data=system.R, model=system.Q @ coef),
        thresholded=tuple(dropped),
    )
    log.coefficients(fit.terms)
    log.finish(f"감쇠 모델 식별 (상대 잔차 {fit.relative_residual:.3e})")
    return fit
