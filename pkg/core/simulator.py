"""
비평활 진동자 시뮬레이터.

Dormand–Prince 5(4) 내장 쌍 + PI 스텝 제어로 m ẍ + B(x, ẋ) + K(x) = F(t) 를 적분합니다.
간극 항의 Heaviside 전환은 사건 탐지 없이 엄격한 허용오차로 처리하고,
스텝을 dt_max = 1 / (4 · output_rate) 로 제한해 전환면이 항상 작은 스텝 안에 들어오게 합니다.

출력은 적분기의 4차 연속 확장(dense output)으로 균일 격자에 재샘플링하며,
가속도 채널은 운동방정식 a = (F − B − K) / m 으로 재구성합니다.

계수 출처: Hairer, Nørsett & Wanner, "Solving ODEs I", DOPRI5.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from core.errors import InvalidModel, NonFiniteState, StepSizeUnderflow
from core.models import ModelSpec, SampledSignal, Trajectory
from utils.logger import get_logger

log = get_logger("Simulator")

# ── Butcher 표 ────────────────────────────────────────────────────
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_A71, _A73, _A74, _A75, _A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84

# 5차 해 − 4차 해 (오차 추정)
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

# 연속 확장 계수
_D1 = -12715105075 / 11282082432
_D3 = 87487479700 / 32700410799
_D4 = -10690763975 / 1880347072
_D5 = 701980252875 / 199316789632
_D6 = -1453857185 / 822651844
_D7 = 69997945 / 29380423

# PI 제어 상수 (Hairer 기본값)
_SAFE = 0.9
_BETA = 0.04
_EXPO1 = 0.2 - _BETA * 0.75
_FAC_MIN_INV = 1 / 0.2  # 한 번에 최대 5배 축소
_FAC_MAX_INV = 1 / 10.0  # 한 번에 최대 10배 확대


# ── 외력 ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ImpulseForce:
    """반정현(half-sine) 충격 외력. t_center 에서 최대값 amplitude, 밑변 폭 width."""

    amplitude: float
    t_center: float
    width: float

    def __post_init__(self) -> None:
        if not (self.amplitude > 0 and self.width > 0):
            raise InvalidModel(f"충격 외력: amplitude, width > 0 이어야 합니다 ({self.amplitude}, {self.width})")

    @property
    def impulse(self) -> float:
        """∫F dt = A · w · 2/π (N·s)."""
        return self.amplitude * self.width * 2.0 / math.pi

    def __call__(self, t: float) -> float:
        start = self.t_center - 0.5 * self.width
        if start < t < start + self.width:
            return self.amplitude * math.sin(math.pi * (t - start) / self.width)
        return 0.0

    def sample(self, times: np.ndarray) -> np.ndarray:
        start = self.t_center - 0.5 * self.width
        phase = (np.asarray(times, dtype=float) - start) / self.width
        inside = (phase > 0.0) & (phase < 1.0)
        return np.where(inside, self.amplitude * np.sin(np.pi * phase), 0.0)


def impulse_force(
    amplitude: float,
    t_center: float,
    width: float,
    fs: float = 20_000.0,
    t_span: tuple[float, float] | None = None,
) -> SampledSignal:
    """
    반정현 충격 외력을 샘플 신호로 만듭니다.

    격자는 t_center 를 정확히 포함하도록 맞춥니다.
    t_span 을 생략하면 [t_center − width, t_center + width] 구간만 만듭니다
    (SampledSignal.interp 는 기록 밖을 0으로 봅니다).
    """
    pulse = ImpulseForce(amplitude, t_center, width)
    if fs <= 0:
        raise InvalidModel(f"fs는 양수여야 합니다 ({fs})")
    lo, hi = t_span if t_span is not None else (t_center - width, t_center + width)
    dt = 1.0 / fs
    k0 = math.ceil((t_center - lo) / dt - 1e-9)
    k1 = math.floor((hi - t_center) / dt + 1e-9)
    times = t_center + dt * np.arange(-k0, k1 + 1)
    return SampledSignal(float(times[0]), dt, pulse.sample(times))


Forcing = SampledSignal | ImpulseForce


def _forcing_fn(forcing: Forcing | None) -> Callable[[float], float] | None:
    if forcing is None:
        return None
    if isinstance(forcing, ImpulseForce):
        return forcing
    t0, dt, values = forcing.t0, forcing.dt, forcing.values.tolist()
    last = len(values) - 1

    def sampled(t: float) -> float:
        pos = (t - t0) / dt
        if pos < 0.0 or pos > last:
            return 0.0
        i = int(pos)
        if i >= last:
            return values[last]
        frac = pos - i
        return values[i] + frac * (values[i + 1] - values[i])

    return sampled


def _sample_forcing(forcing: Forcing | None, times: np.ndarray) -> np.ndarray:
    if forcing is None:
        return np.zeros_like(times)
    if isinstance(forcing, ImpulseForce):
        return forcing.sample(times)
    return forcing.interp(times)


# ── 설정 ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SimConfig:
    """
    시뮬레이션 설정.

    abs_tol 은 상태 성분별(상태 단위)로 그대로 적용합니다.
    dt_min 을 생략하면 64 · eps · max(|t|, 1) 을 씁니다.
    """

    t_span: tuple[float, float]
    ic: tuple[float, float]
    rel_tol: float = 1e-12
    abs_tol: float = 1e-16
    output_rate: float = 20_000.0
    forcing: Forcing | None = None
    dt_min: float | None = None

    def __post_init__(self) -> None:
        t_start, t_end = (float(t) for t in self.t_span)
        if not (math.isfinite(t_start) and math.isfinite(t_end)) or t_end <= t_start:
            raise InvalidModel(f"t_span: t_end > t_start 이어야 합니다 ({self.t_span})")
        for name in ("rel_tol", "abs_tol"):
            tol = getattr(self, name)
            if not (0.0 < tol < 1.0):
                raise InvalidModel(f"{name} 는 (0, 1) 범위여야 합니다 ({tol})")
        if not (math.isfinite(self.output_rate) and self.output_rate > 0):
            raise InvalidModel(f"output_rate 는 양수여야 합니다 ({self.output_rate})")
        x0, v0 = (float(c) for c in self.ic)
        if not (math.isfinite(x0) and math.isfinite(v0)):
            raise InvalidModel(f"초기조건이 유한하지 않습니다 ({self.ic})")
        if self.dt_min is not None and not self.dt_min > 0:
            raise InvalidModel(f"dt_min 은 양수여야 합니다 ({self.dt_min})")
        object.__setattr__(self, "t_span", (t_start, t_end))
        object.__setattr__(self, "ic", (x0, v0))

    @property
    def dt_max(self) -> float:
        return 1.0 / (4.0 * self.output_rate)

    @property
    def n_samples(self) -> int:
        t_start, t_end = self.t_span
        return int(math.floor((t_end - t_start) * self.output_rate + 1e-9)) + 1

    def output_times(self) -> np.ndarray:
        return self.t_span[0] + np.arange(self.n_samples) / self.output_rate

    def with_ic(self, x0: float, v0: float) -> SimConfig:
        return SimConfig(self.t_span, (x0, v0), self.rel_tol, self.abs_tol, self.output_rate, self.forcing, self.dt_min)


@dataclass(frozen=True)
class SimStats:
    accepted: int
    rejected: int
    rhs_evals: int


# ── 적분 ──────────────────────────────────────────────────────────


def _initial_step(f, t, x, v, fx, fv, rtol, atol, h_max) -> float:
    """Hairer hinit: 1차·2차 도함수 크기로 첫 스텝을 추정합니다."""
    sx = atol + rtol * abs(x)
    sv = atol + rtol * abs(v)
    d0 = math.sqrt(((x / sx) ** 2 + (v / sv) ** 2) / 2)
    d1 = math.sqrt(((fx / sx) ** 2 + (fv / sv) ** 2) / 2)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, h_max)
    gx, gv = f(t + h0, x + h0 * fx, v + h0 * fv)
    d2 = math.sqrt((((gx - fx) / sx) ** 2 + ((gv - fv) / sv) ** 2) / 2) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    return min(100 * h0, h1, h_max)


def _integrate(
    f: Callable[[float, float, float], tuple[float, float]],
    cfg: SimConfig,
    times: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, SimStats]:
    rtol, atol = cfg.rel_tol, cfg.abs_tol
    t, t_end = cfg.t_span
    x, v = cfg.ic
    h_max = cfg.dt_max
    n_out = times.size
    grid = times.tolist()
    xs = np.empty(n_out)
    vs = np.empty(n_out)
    xs[0], vs[0] = x, v
    k_out = 1

    k1x, k1v = f(t, x, v)
    h = _initial_step(f, t, x, v, k1x, k1v, rtol, atol, h_max)
    facold = 1e-4
    reject = False
    accepted = rejected = 0
    evals = 2

    while t < t_end:
        dt_min = cfg.dt_min if cfg.dt_min is not None else 64 * np.finfo(float).eps * max(abs(t), 1.0)
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        if h < dt_min and not last:
            raise StepSizeUnderflow(
                f"t={t:.9g}s 에서 스텝 {h:.3e}s 가 최소 스텝 {dt_min:.3e}s 보다 작습니다 (강성 또는 특이점)"
            )

        k2x, k2v = f(t + _C2 * h, x + h * _A21 * k1x, v + h * _A21 * k1v)
        k3x, k3v = f(
            t + _C3 * h,
            x + h * (_A31 * k1x + _A32 * k2x),
            v + h * (_A31 * k1v + _A32 * k2v),
        )
        k4x, k4v = f(
            t + _C4 * h,
            x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x),
            v + h * (_A41 * k1v + _A42 * k2v + _A43 * k3v),
        )
        k5x, k5v = f(
            t + _C5 * h,
            x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x),
            v + h * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v),
        )
        k6x, k6v = f(
            t + h,
            x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x),
            v + h * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v),
        )
        x1 = x + h * (_A71 * k1x + _A73 * k3x + _A74 * k4x + _A75 * k5x + _A76 * k6x)
        v1 = v + h * (_A71 * k1v + _A73 * k3v + _A74 * k4v + _A75 * k5v + _A76 * k6v)
        t1 = t_end if last else t + h
        k7x, k7v = f(t1, x1, v1)
        evals += 6

        if not (math.isfinite(x1) and math.isfinite(v1)):
            raise NonFiniteState(f"t={t:.9g}s 에서 상태가 유한하지 않습니다 (x={x1}, v={v1})")

        ex = h * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
        ev = h * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * k7v)
        sx = atol + rtol * max(abs(x), abs(x1))
        sv = atol + rtol * max(abs(v), abs(v1))
        err = math.sqrt(((ex / sx) ** 2 + (ev / sv) ** 2) / 2)

        fac11 = err ** _EXPO1 if err > 0.0 else 0.0
        if err <= 1.0:
            # 수락: [t, t1] 안의 출력 시점을 연속 확장으로 채움
            while k_out < n_out and grid[k_out] <= t1:
                theta = (grid[k_out] - t) / h
                theta1 = 1.0 - theta
                dx = x1 - x
                bx = h * k1x - dx
                cx = dx - h * k7x - bx
                qx = h * (_D1 * k1x + _D3 * k3x + _D4 * k4x + _D5 * k5x + _D6 * k6x + _D7 * k7x)
                dv = v1 - v
                bv = h * k1v - dv
                cv = dv - h * k7v - bv
                qv = h * (_D1 * k1v + _D3 * k3v + _D4 * k4v + _D5 * k5v + _D6 * k6v + _D7 * k7v)
                xs[k_out] = x + theta * (dx + theta1 * (bx + theta * (cx + theta1 * qx)))
                vs[k_out] = v + theta * (dv + theta1 * (bv + theta * (cv + theta1 * qv)))
                k_out += 1

            accepted += 1
            fac = fac11 / facold**_BETA
            fac = max(_FAC_MAX_INV, min(_FAC_MIN_INV, fac / _SAFE))
            h_new = min(h / fac, h_max)
            if reject:
                h_new = min(h_new, h)
            facold = max(err, 1e-4)
            reject = False
            t, x, v = t1, x1, v1
            k1x, k1v = k7x, k7v
            h = h_new
        else:
            rejected += 1
            reject = True
            h = h / min(_FAC_MIN_INV, fac11 / _SAFE)

    # 부동소수 반올림으로 마지막 출력 시점이 t_end 를 살짝 넘는 경우
    while k_out < n_out:
        xs[k_out], vs[k_out] = x, v
        k_out += 1

    return xs, vs, SimStats(accepted, rejected, evals)


def simulate(spec: ModelSpec, cfg: SimConfig) -> Trajectory:
    """
    ModelSpec 운동방정식을 적분해 균일 샘플 Trajectory를 반환합니다.

    Args:
        spec: 질량, 감쇠 항, 강성 항.
        cfg : 시간 구간, 초기조건, 허용오차, 출력 샘플링 주파수, 외력.

    Returns:
        output_rate 로 샘플링된 궤적. a 는 운동방정식으로 재구성합니다.

    Raises:
        StepSizeUnderflow: 스텝이 dt_min 아래로 줄었을 때.
        NonFiniteState: NaN/Inf 상태가 나타났을 때.
    """
    log.start(f"시뮬레이션 t∈[{cfg.t_span[0]:g}, {cfg.t_span[1]:g}]s, ic={cfg.ic}")
    force = spec.scalar_force_fn()
    inv_m = 1.0 / spec.mass
    external = _forcing_fn(cfg.forcing)

    if external is None:

        def rhs(t: float, x: float, v: float) -> tuple[float, float]:
            return v, -force(x, v) * inv_m

    else:

        def rhs(t: float, x: float, v: float) -> tuple[float, float]:
            return v, (external(t) - force(x, v)) * inv_m

    times = cfg.output_times()
    log.step("적분", f"DOPRI5 rtol={cfg.rel_tol:g} atol={cfg.abs_tol:g} dt_max={cfg.dt_max:.3e}s")
    try:
        xs, vs, stats = _integrate(rhs, cfg, times)
    except OverflowError:
        # float 거듭제곱은 inf 대신 OverflowError 를 냅니다
        raise NonFiniteState("상태가 발산했습니다 (부동소수 범위 초과)") from None
    log.ok("적분", f"수락 {stats.accepted} / 거부 {stats.rejected} 스텝, 우변 평가 {stats.rhs_evals}회")

    f_ext = _sample_forcing(cfg.forcing, times)
    a = (f_ext - spec.damping_force(xs, vs) - spec.stiffness_force(xs)) / spec.mass
    traj = Trajectory(
        t0=cfg.t_span[0],
        dt=1.0 / cfg.output_rate,
        x=xs,
        v=vs,
        mass=spec.mass,
        a=a,
        f_ext=f_ext,
    )
    log.finish(f"시뮬레이션 ({times.size} 샘플)")
    return traj


def mechanical_energy(spec: ModelSpec, traj: Trajectory) -> np.ndarray:
    """E(t) = ½ m v² + ∫₀ˣ K dξ (J)."""
    return 0.5 * spec.mass * traj.v**2 + spec.potential_energy(traj.x)
