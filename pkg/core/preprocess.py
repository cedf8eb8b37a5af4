"""
식별용 데이터 전처리.

- 변위 영점 교차 γ_i 탐지와 T(γ_i) = ½ m ẋ(γ_i)² 계산
- 누적 사다리꼴 적분
- 영위상(전진 + 후진) Butterworth 고역통과 필터
- 가속도 → 속도 → 변위 재구성 (적분 후 고역통과, 다시 적분 후 고역통과)
- 운동·소산·역학 에너지 시계열

교차점의 속도와 누적 적분은 선형 보간으로 γ_i 에 맞춥니다.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal
from scipy.integrate import cumulative_trapezoid

from core.errors import CutoffOutOfRange, InvalidModel, NoCrossings
from core.models import BasisTerm, ModelSpec, SampledSignal, TermKind, Trajectory
from utils.logger import get_logger

log = get_logger("Preprocess")

DEFAULT_FILTER_ORDER = 3
DEFAULT_CUTOFF_HZ = 1.5
DEFAULT_FORCE_THRESHOLD = 1e-3
DEFAULT_ENERGY_FLOOR = 1e-6

_VELOCITY_GATES = {TermKind.VEL_GATE_ONE_SIDED, TermKind.VEL_GATE_TWO_SIDED}

_NO_CROSSING_HINT = (
    "변위가 0을 두 번 이상 지나야 합니다. 응답 기록을 늘리거나, "
    "가속도 재구성 시 고역통과 필터로 변위 오프셋을 제거했는지 확인하세요"
)


# ── 영점 교차 ─────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class CrossingSet:
    """변위 영점 교차 시점과 그때의 속도·운동에너지."""

    gammas: np.ndarray
    v_at_gamma: np.ndarray
    T_at_gamma: np.ndarray
    mass: float

    def __len__(self) -> int:
        return self.gammas.size

    @property
    def n_equations(self) -> int:
        """Phase 1 방정식 수 N (= 교차점 수 − 1)."""
        return self.gammas.size - 1

    @property
    def dissipated(self) -> np.ndarray:
        """R_i = T(γ_0) − T(γ_i), i = 1..N."""
        return self.T_at_gamma[0] - self.T_at_gamma[1:]

    def subset(self, mask: np.ndarray) -> CrossingSet:
        return CrossingSet(self.gammas[mask], self.v_at_gamma[mask], self.T_at_gamma[mask], self.mass)


def _crossing_set(gammas: np.ndarray, v_at: np.ndarray, mass: float) -> CrossingSet:
    return CrossingSet(gammas, v_at, 0.5 * mass * v_at**2, mass)


def _zero_run_crossings(s: np.ndarray, times: np.ndarray) -> np.ndarray:
    """부호 배열에서 연속된 0 샘플 구간마다 교차 시각을 하나씩 고릅니다."""
    n = s.size
    padded = np.concatenate(([0], (s == 0).astype(np.int8), [0]))
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    out: list[float] = []
    for a, b in zip(starts, ends):
        left = s[a - 1] if a > 0 else 0.0
        right = s[b + 1] if b < n - 1 else 0.0
        if a == 0 and b == n - 1:
            continue
        if a == 0:
            if right != 0:
                out.append(times[b])
        elif b == n - 1:
            if left != 0:
                out.append(times[a])
        elif left * right < 0:
            out.append(0.5 * (times[a] + times[b]))
    return np.asarray(out, dtype=float)


def find_zero_crossings(x: SampledSignal, v: SampledSignal, mass: float) -> CrossingSet:
    """
    변위 부호 변화마다 γ_i 하나를 선형 보간으로 찾습니다.

    정확히 0인 샘플이 이어지는 구간은 하나로 묶어, 구간 양쪽 부호가 반대일 때만
    구간 중앙 시각을 교차로 봅니다 (닿았다 돌아가는 접선 교차는 제외).
    기록 양 끝에 붙은 0 구간은 반대쪽 이웃이 0이 아니면 그 이웃 쪽 끝 샘플을
    교차로 봅니다 (예: x(0) = 0 에서 출발).

    Raises:
        NoCrossings: 교차점이 2개 미만일 때.
    """
    if len(x) != len(v) or x.t0 != v.t0 or x.dt != v.dt:
        raise InvalidModel("x, v 신호의 시간축이 일치하지 않습니다")
    if not mass > 0:
        raise InvalidModel(f"질량은 양수여야 합니다 ({mass})")

    xs = x.values
    times = x.times
    s = np.sign(xs)

    # 인접 샘플 사이 엄격한 부호 변화
    k = np.flatnonzero(s[:-1] * s[1:] < 0)
    frac = xs[k] / (xs[k] - xs[k + 1])
    g_strict = times[k] + frac * x.dt
    v_strict = v.values[k] + frac * (v.values[k + 1] - v.values[k])

    g_zero = _zero_run_crossings(s, times)
    gammas = np.concatenate([g_strict, g_zero])
    v_at = np.concatenate([v_strict, np.interp(g_zero, times, v.values)])
    order = np.argsort(gammas, kind="stable")
    gammas, v_at = gammas[order], v_at[order]

    if gammas.size < 2:
        raise NoCrossings(f"영점 교차가 {gammas.size}개뿐입니다", hint=_NO_CROSSING_HINT)
    return _crossing_set(gammas, v_at, mass)


def trim_crossings(
    crossings: CrossingSet,
    f_ext: SampledSignal | None = None,
    force_threshold: float = DEFAULT_FORCE_THRESHOLD,
    energy_floor: float = DEFAULT_ENERGY_FLOOR,
    t_end: float | None = None,
) -> CrossingSet:
    """
    Phase 1 에 쓸 교차점 구간을 고릅니다.

    - 외력이 있으면 γ_0 는 |f_ext| 가 force_threshold · max|f_ext| 아래로 마지막으로
      떨어진 뒤의 첫 교차점입니다 (이후 외부 일이 없어야 에너지식이 성립).
    - T(γ_i) < energy_floor · T(γ_0) 가 되는 첫 교차점부터 버립니다.
    - t_end 가 주어지면 그 이후 교차점을 버립니다.

    Raises:
        NoCrossings: 남은 교차점이 2개 미만일 때.
    """
    mask = np.ones(len(crossings), dtype=bool)
    if f_ext is not None:
        peak = float(np.max(np.abs(f_ext.values)))
        if peak > 0:
            active = np.flatnonzero(np.abs(f_ext.values) >= force_threshold * peak)
            t_quiet = f_ext.t0 + f_ext.dt * (active[-1] + 1)
            mask &= crossings.gammas >= t_quiet
            log.step("γ0", f"외력 종료 시점 {t_quiet:.6g}s 이후 교차점만 사용")
    if t_end is not None:
        mask &= crossings.gammas <= t_end

    idx = np.flatnonzero(mask)
    if idx.size < 2:
        raise NoCrossings(f"트리밍 후 교차점이 {idx.size}개뿐입니다", hint=_NO_CROSSING_HINT)

    T = crossings.T_at_gamma[idx]
    if energy_floor > 0 and T[0] > 0:
        low = np.flatnonzero(T < energy_floor * T[0])
        if low.size:
            idx = idx[: low[0]]
    if idx.size < 2:
        raise NoCrossings(f"에너지 하한 적용 후 교차점이 {idx.size}개뿐입니다", hint=_NO_CROSSING_HINT)

    keep = np.zeros(len(crossings), dtype=bool)
    keep[idx] = True
    return crossings.subset(keep)


# ── 적분 / 필터 ───────────────────────────────────────────────────


def cumulative_integral(y: SampledSignal) -> SampledSignal:
    """누적 사다리꼴 적분. 첫 값 0, 길이 유지."""
    return y.with_values(cumulative_trapezoid(y.values, dx=y.dt, initial=0.0))


def _settling_samples(sos: np.ndarray, fs: float, cutoff_hz: float) -> int:
    """계단 응답이 최대값의 1% 안으로 정착하는 데 걸리는 샘플 수."""
    n = max(int(30.0 / cutoff_hz * fs), 16)
    step = np.abs(signal.sosfilt(sos, np.ones(n)))
    above = np.flatnonzero(step > 0.01 * step.max())
    return int(above[-1]) + 1 if above.size else 1


def butterworth_highpass(
    y: SampledSignal,
    order: int = DEFAULT_FILTER_ORDER,
    cutoff_hz: float = DEFAULT_CUTOFF_HZ,
) -> SampledSignal:
    """
    영위상 Butterworth 고역통과 필터.

    쌍선형 변환(주파수 사전 왜곡)으로 설계한 디지털 필터를 전진·후진으로 적용합니다.
    가장자리는 1% 정착 시간의 3배 길이로 반사(even) 패딩한 뒤 잘라냅니다.

    Raises:
        CutoffOutOfRange: cutoff_hz 가 (0, Nyquist) 밖일 때.
    """
    nyquist = 0.5 * y.fs
    if not (0.0 < cutoff_hz < nyquist):
        raise CutoffOutOfRange(f"차단주파수 {cutoff_hz} Hz 가 (0, {nyquist:g}) Hz 범위를 벗어났습니다")
    if order < 1:
        raise InvalidModel(f"필터 차수는 1 이상이어야 합니다 ({order})")

    sos = signal.butter(order, cutoff_hz, btype="highpass", fs=y.fs, output="sos")
    padlen = 3 * _settling_samples(sos, y.fs, cutoff_hz)
    if padlen >= len(y):
        log.warn("필터", f"신호 길이 {len(y)} 가 패딩 길이 {padlen} 보다 짧아 {len(y) - 1} 로 줄입니다")
        padlen = len(y) - 1
    out = signal.sosfiltfilt(sos, y.values, padtype="even", padlen=padlen)
    return y.with_values(out)


def reconstruct_states(
    a: SampledSignal,
    mass: float,
    order: int = DEFAULT_FILTER_ORDER,
    cutoff_hz: float = DEFAULT_CUTOFF_HZ,
    f_ext: SampledSignal | None = None,
) -> Trajectory:
    """
    가속도에서 속도·변위를 재구성합니다.

    v = highpass(∫a), x = highpass(∫v) 순서입니다. 반환 궤적의 a 는 입력 그대로입니다.
    """
    log.start(f"상태 재구성 ({len(a)} 샘플, {order}차 {cutoff_hz:g} Hz 고역통과)")
    v = butterworth_highpass(cumulative_integral(a), order, cutoff_hz)
    log.ok("속도", "적분 + 고역통과")
    x = butterworth_highpass(cumulative_integral(v), order, cutoff_hz)
    log.ok("변위", "적분 + 고역통과")
    log.finish("상태 재구성")
    return Trajectory(
        t0=a.t0,
        dt=a.dt,
        x=x.values,
        v=v.values,
        mass=mass,
        a=a.values,
        f_ext=None if f_ext is None else f_ext.values,
    )


# ── 에너지 ────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class EnergyTrace:
    """운동 T(t), 소산 D(t), 역학 E(t) 에너지 (J). E(γ_0) = T(γ_0)."""

    times: np.ndarray
    kinetic: np.ndarray
    dissipated: np.ndarray
    mechanical: np.ndarray


def kinetic_energy(traj: Trajectory) -> np.ndarray:
    """T(t) = ½ m ẋ²."""
    return 0.5 * traj.mass * traj.v**2


def interp_at(times: np.ndarray, values: np.ndarray, at: np.ndarray) -> np.ndarray:
    """균일 격자 위 누적량을 임의 시점으로 선형 보간."""
    return np.interp(at, times, values)


def power_integral(traj: Trajectory, term_values: np.ndarray) -> np.ndarray:
    """∫ ẋ · term dτ 의 누적 사다리꼴 적분 (t0 기준)."""
    return cumulative_trapezoid(traj.v * term_values, dx=traj.dt, initial=0.0)


def _gate_margin(term: BasisTerm, x: np.ndarray) -> np.ndarray:
    """게이트가 열려 있으면 양수: x − e (편측) 또는 |x| − e (양측)."""
    if term.kind is TermKind.VEL_GATE_ONE_SIDED:
        return x - term.clearance
    return np.abs(x) - term.clearance


def term_power_integral(traj: Trajectory, term: BasisTerm) -> np.ndarray:
    """
    항 하나의 누적 일률 적분 ∫ ẋ · term dτ (t0 기준).

    속도 게이트 항은 게이트가 샘플 사이에서 열리거나 닫히면 그 셀을 개폐 시점에서 나눠,
    열린 부분만 사다리꼴로 적분합니다. 개폐 시점과 그때의 ẋ 는 선형 보간합니다.
    """
    values = np.broadcast_to(term.evaluate(traj.x, traj.v), traj.x.shape)
    if term.kind not in _VELOCITY_GATES:
        return power_integral(traj, values)

    f = traj.v * values
    cells = 0.5 * traj.dt * (f[:-1] + f[1:])
    margin = _gate_margin(term, traj.x)
    is_open = margin > 0.0
    k = np.flatnonzero(is_open[:-1] != is_open[1:])
    if k.size:
        theta = margin[k] / (margin[k] - margin[k + 1])
        v_switch = traj.v[k] + theta * (traj.v[k + 1] - traj.v[k])
        f_switch = v_switch * v_switch
        cells[k] = np.where(
            is_open[k],
            0.5 * theta * traj.dt * (f[k] + f_switch),
            0.5 * (1.0 - theta) * traj.dt * (f_switch + f[k + 1]),
        )
    return np.concatenate(([0.0], np.cumsum(cells)))



def dissipated_energy_of_model(
    traj: Trajectory,
    damping: ModelSpec | tuple[tuple[BasisTerm, float], ...] | list[tuple[BasisTerm, float]],
    crossings: CrossingSet | None = None,
) -> EnergyTrace:
    """
    감쇠 모델이 소산한 에너지 D(t) = ∫ ẋ B(x, ẋ) dτ 와 E(t) 를 계산합니다.

    E(t) = T(γ_0) + D(γ_0) − D(t) 로, E(γ_0) = T(γ_0) 이 되도록 맞춥니다.
    crossings 를 생략하면 궤적에서 직접 찾습니다.
    """
    spec = damping if isinstance(damping, ModelSpec) else ModelSpec(traj.mass, tuple(damping))
    times = traj.times
    D = np.zeros(len(traj))
    for term, c in spec.damping_terms:
        D = D + c * term_power_integral(traj, term)
    if crossings is None:
        crossings = find_zero_crossings(traj.signal("x"), traj.signal("v"), traj.mass)
    g0 = crossings.gammas[0]
    E = crossings.T_at_gamma[0] + float(interp_at(times, D, g0)) - D
    return EnergyTrace(times=times, kinetic=kinetic_energy(traj), dissipated=D, mechanical=E)


def first_sample_at_or_after(traj: Trajectory, t: float) -> int:
    """t 이상인 첫 샘플 인덱스."""
    return int(min(len(traj), max(0, math.ceil((t - traj.t0) / traj.dt - 1e-9))))
