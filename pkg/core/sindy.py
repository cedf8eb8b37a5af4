"""
SINDy 기준선: 순차 임계 최소제곱(STLS).

감쇠 + 강성 후보를 합친 라이브러리로 y(t) = f_ext(t) − m a(t) 를 회귀합니다.
계수는 물리 단위(N 기준)이므로 EDDI 결과와 바로 비교할 수 있고,
임계값 λ 는 정규화하지 않은 원래 단위 계수에 절대값으로 적용합니다.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from core.errors import AllTermsEliminated, EmptyLibrary, InvalidModel, MissingAcceleration
from core.models import BasisTerm, Trajectory
from core.phase1 import solve_linear_ls
from utils.logger import get_logger

log = get_logger("SINDy")

DEFAULT_LAMBDA = 0.05
DEFAULT_MAX_ITERS = 20


@dataclass(frozen=True)
class StlsConfig:
    threshold: float = DEFAULT_LAMBDA
    max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self) -> None:
        if not self.threshold >= 0:
            raise InvalidModel(f"λ 는 0 이상이어야 합니다 ({self.threshold})")
        if self.max_iters < 1:
            raise InvalidModel(f"max_iters 는 1 이상이어야 합니다 ({self.max_iters})")


@dataclass(frozen=True, eq=False)
class SindyFit:
    terms: tuple[tuple[BasisTerm, float], ...]
    residual_norm: float
    relative_residual: float
    condition_estimate: float
    iterations: int
    active_history: tuple[tuple[bool, ...], ...]

    @property
    def damping_terms(self) -> tuple[tuple[BasisTerm, float], ...]:
        return tuple((t, c) for t, c in self.terms if t.involves_velocity)

    @property
    def stiffness_terms(self) -> tuple[tuple[BasisTerm, float], ...]:
        return tuple((t, c) for t, c in self.terms if not t.involves_velocity)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms])


def library_matrix(traj: Trajectory, library: Sequence[BasisTerm]) -> np.ndarray:
    """감쇠 항은 (x, v), 강성 항은 (x, 0) 에서 평가한 열을 쌓습니다."""
    cols = []
    for term in library:
        v = traj.v if term.involves_velocity else 0.0
        cols.append(np.broadcast_to(term.evaluate(traj.x, v), traj.x.shape))
    return np.column_stack(cols)


def active_columns(Theta: np.ndarray, active: np.ndarray) -> np.ndarray:
    """활성 열만 남긴 C 순서 행렬. 모두 활성이면 원래 행렬을 그대로 돌려줍니다."""
    if active.all():
        return Theta
    return np.ascontiguousarray(Theta[:, active])


def stls(Theta: np.ndarray, y: np.ndarray, cfg: StlsConfig) -> tuple[np.ndarray, int, list[np.ndarray], float]:
    """
    순차 임계 최소제곱.

    활성 열로 최소제곱 → |c| < λ 인 계수 0 → 활성 집합이 변하지 않을 때까지 반복.
    활성 집합은 반복마다 줄어들기만 합니다.

    Returns:
        (계수, 반복 횟수, 활성 집합 이력, 마지막 풀이의 조건수)
    """
    m = Theta.shape[1]
    active = np.ones(m, dtype=bool)
    coef = np.zeros(m)
    history = [active.copy()]
    cond = float("nan")
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        coef = np.zeros(m)
        result = solve_linear_ls(active_columns(Theta, active), y)
        coef[active] = result.coefficients
        cond = result.condition_estimate
        new_active = active & (np.abs(coef) >= cfg.threshold)
        if not new_active.any():
            raise AllTermsEliminated(f"λ={cfg.threshold:g} 가 모든 항을 제거했습니다")
        if np.array_equal(new_active, active):
            break
        active = new_active
        history.append(active.copy())
    else:
        # max_iters 에 도달: 마지막 활성 집합으로 한 번 더 풀어 계수를 맞춤
        coef = np.zeros(m)
        result = solve_linear_ls(active_columns(Theta, active), y)
        coef[active] = result.coefficients
        cond = result.condition_estimate
    coef[~active] = 0.0
    return coef, iterations, history, cond


def sindy_identify(traj: Trajectory, library: Sequence[BasisTerm], cfg: StlsConfig | None = None) -> SindyFit:
    """
    STLS 로 전체 운동방정식을 식별합니다.

    Raises:
        EmptyLibrary: 라이브러리가 비었을 때.
        MissingAcceleration: 가속도 채널이 없을 때.
        AllTermsEliminated: λ 가 모든 항을 제거했을 때.
    """
    cfg = cfg or StlsConfig()
    library = tuple(library)
    if not library:
        raise EmptyLibrary("SINDy 후보 라이브러리가 비어 있습니다")
    if len(set(library)) != len(library):
        raise InvalidModel("SINDy 라이브러리에 중복 항이 있습니다")
    if traj.a is None:
        raise MissingAcceleration("SINDy 회귀 대상 f_ext − m a 에는 가속도 채널이 필요합니다")

    log.start(f"SINDy 식별 (후보 {len(library)}개, λ={cfg.threshold:g})")
    Theta = library_matrix(traj, library)
    y = traj.f_ext - traj.momentum_rate
    coef, iterations, history, cond = stls(Theta, y, cfg)

    residual = float(np.linalg.norm(Theta @ coef - y))
    y_norm = float(np.linalg.norm(y))
    fit = SindyFit(
        terms=tuple(zip(library, coef.tolist())),
        residual_norm=residual,
        relative_residual=residual / y_norm if y_norm > 0 else 0.0,
        condition_estimate=cond,
        iterations=iterations,
        active_history=tuple(tuple(bool(b) for b in h) for h in history),
    )
    log.ok("STLS", f"{iterations}회 반복, 활성 항 {int(np.count_nonzero(coef))}/{len(library)}")
    log.coefficients(fit.terms)
    log.finish("SINDy 식별")
    return fit
