"""
진동자 모델 정의.

후보 힘 항(BasisTerm), 운동방정식 모델(ModelSpec), 균일 샘플 신호(SampledSignal),
정렬된 상태 채널 묶음(Trajectory)과 감쇠력·복원력의 점별 평가를 제공합니다.

모든 타입은 생성 후 불변이며, 평가 함수는 순수 함수입니다.
Heaviside 규약은 H(0) = 0 입니다. 게이트 항은 경계 |x| = e 위에서 정확히 0입니다.

단위: 변위 m, 속도 m/s, 힘 N, 질량 kg. 계수는 항 종류별 SI 단위를 그대로 저장합니다.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from core.errors import InvalidModel

ArrayLike = float | np.ndarray


# ── 후보 항 ───────────────────────────────────────────────────────


class TermKind(str, Enum):
    DISP_POWER = "disp_power"
    VEL_POWER = "vel_power"
    MIXED_DISP_SQ_VEL = "mixed_disp_sq_vel"
    VEL_GATE_ONE_SIDED = "vel_gate_one_sided"
    VEL_GATE_TWO_SIDED = "vel_gate_two_sided"
    CLEARANCE_SPRING_ONE_SIDED = "clearance_spring_one_sided"
    CLEARANCE_SPRING_TWO_SIDED = "clearance_spring_two_sided"


_POWERED = {TermKind.DISP_POWER, TermKind.VEL_POWER}
_GATED = {
    TermKind.VEL_GATE_ONE_SIDED,
    TermKind.VEL_GATE_TWO_SIDED,
    TermKind.CLEARANCE_SPRING_ONE_SIDED,
    TermKind.CLEARANCE_SPRING_TWO_SIDED,
}
_VELOCITY_KINDS = {
    TermKind.VEL_POWER,
    TermKind.MIXED_DISP_SQ_VEL,
    TermKind.VEL_GATE_ONE_SIDED,
    TermKind.VEL_GATE_TWO_SIDED,
}

# 지수 위첨자 없이 ASCII로만 표기 (CSV/JSON 호환)
_VEL_UNIT = {1: "N*s/m"}


@dataclass(frozen=True)
class BasisTerm:
    """
    후보 힘 항 하나.

    kind 별 평가식:
        DISP_POWER(i)               x^i
        VEL_POWER(j)                v^j
        MIXED_DISP_SQ_VEL           x^2 v
        VEL_GATE_ONE_SIDED(e)       v H(x - e)
        VEL_GATE_TWO_SIDED(e)       v H(|x| - e)
        CLEARANCE_SPRING_ONE_SIDED  (x - e) H(x - e)
        CLEARANCE_SPRING_TWO_SIDED  (|x| - e) sgn(x) H(|x| - e)
    """

    kind: TermKind
    power: int | None = None
    clearance: float | None = None

    def __post_init__(self) -> None:
        try:
            kind = TermKind(self.kind)
        except ValueError:
            raise InvalidModel(f"알 수 없는 항 종류: {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)

        if kind in _POWERED:
            if self.power is None or isinstance(self.power, bool) or int(self.power) != self.power or self.power < 1:
                raise InvalidModel(f"{kind.value}: power는 양의 정수여야 합니다 (받은 값: {self.power!r})")
            object.__setattr__(self, "power", int(self.power))
        elif self.power is not None:
            raise InvalidModel(f"{kind.value}: power를 지정할 수 없습니다")

        if kind in _GATED:
            if self.clearance is None or not math.isfinite(self.clearance) or self.clearance <= 0:
                raise InvalidModel(f"{kind.value}: clearance e > 0 이 필요합니다 (받은 값: {self.clearance!r})")
            object.__setattr__(self, "clearance", float(self.clearance))
        elif self.clearance is not None:
            raise InvalidModel(f"{kind.value}: clearance를 지정할 수 없습니다")

    # ── 분류 ──

    @property
    def involves_velocity(self) -> bool:
        """감쇠 항(속도 포함)이면 True, 강성 항이면 False."""
        return self.kind in _VELOCITY_KINDS

    @property
    def is_gated(self) -> bool:
        return self.kind in _GATED

    def with_clearance(self, clearance: float) -> BasisTerm:
        """clearance만 바꾼 사본. 게이트 항이 아니면 자기 자신."""
        if not self.is_gated:
            return self
        return BasisTerm(self.kind, self.power, clearance)

    # ── 표기 ──

    @property
    def label(self) -> str:
        e = f"{self.clearance:g}" if self.clearance is not None else ""
        match self.kind:
            case TermKind.DISP_POWER:
                return "x" if self.power == 1 else f"x^{self.power}"
            case TermKind.VEL_POWER:
                return "v" if self.power == 1 else f"v^{self.power}"
            case TermKind.MIXED_DISP_SQ_VEL:
                return "x^2*v"
            case TermKind.VEL_GATE_ONE_SIDED:
                return f"v*H(x-{e})"
            case TermKind.VEL_GATE_TWO_SIDED:
                return f"v*H(|x|-{e})"
            case TermKind.CLEARANCE_SPRING_ONE_SIDED:
                return f"(x-{e})*H(x-{e})"
            case TermKind.CLEARANCE_SPRING_TWO_SIDED:
                return f"(|x|-{e})*sgn(x)*H(|x|-{e})"
        raise AssertionError(self.kind)

    @property
    def coefficient_unit(self) -> str:
        """계수 단위 (항 값의 단위로 N을 나눈 것)."""
        match self.kind:
            case TermKind.DISP_POWER:
                return "N/m" if self.power == 1 else f"N/m^{self.power}"
            case TermKind.VEL_POWER:
                return _VEL_UNIT.get(self.power, f"N*s^{self.power}/m^{self.power}")
            case TermKind.MIXED_DISP_SQ_VEL:
                return "N*s/m^3"
            case TermKind.VEL_GATE_ONE_SIDED | TermKind.VEL_GATE_TWO_SIDED:
                return "N*s/m"
            case _:
                return "N/m"

    def descriptor(self) -> dict:
        """설정/보고서 직렬화용 dict."""
        out: dict = {"kind": self.kind.value}
        if self.power is not None:
            out["power"] = self.power
        if self.clearance is not None:
            out["clearance"] = self.clearance
        return out

    # ── 평가 ──

    def evaluate(self, x: ArrayLike, v: ArrayLike) -> ArrayLike:
        """항 값 (계수 곱하기 전). 스칼라 입력이면 float, 배열이면 ndarray."""
        xa = np.asarray(x, dtype=float)
        va = np.asarray(v, dtype=float)
        e = self.clearance
        match self.kind:
            case TermKind.DISP_POWER:
                out = xa ** self.power + 0.0 * va
            case TermKind.VEL_POWER:
                out = va ** self.power + 0.0 * xa
            case TermKind.MIXED_DISP_SQ_VEL:
                out = xa * xa * va
            case TermKind.VEL_GATE_ONE_SIDED:
                out = np.where(xa - e > 0.0, va, 0.0)
            case TermKind.VEL_GATE_TWO_SIDED:
                out = np.where(np.abs(xa) - e > 0.0, va, 0.0)
            case TermKind.CLEARANCE_SPRING_ONE_SIDED:
                out = np.where(xa - e > 0.0, xa - e, 0.0) + 0.0 * va
            case TermKind.CLEARANCE_SPRING_TWO_SIDED:
                ax = np.abs(xa)
                out = np.where(ax - e > 0.0, (ax - e) * np.sign(xa), 0.0) + 0.0 * va
            case _:
                raise AssertionError(self.kind)
        return float(out) if out.ndim == 0 else out

    def scalar_fn(self) -> Callable[[float, float], float]:
        """
        float 전용 평가 함수를 반환합니다.

        적분기 내부 루프에서 numpy 스칼라 연산 비용을 피하기 위해 사용합니다.
        evaluate()와 같은 식을 계산합니다.
        """
        e = self.clearance
        p = self.power
        match self.kind:
            case TermKind.DISP_POWER:
                return (lambda x, v: x) if p == 1 else (lambda x, v: x ** p)
            case TermKind.VEL_POWER:
                return (lambda x, v: v) if p == 1 else (lambda x, v: v ** p)
            case TermKind.MIXED_DISP_SQ_VEL:
                return lambda x, v: x * x * v
            case TermKind.VEL_GATE_ONE_SIDED:
                return lambda x, v: v if x - e > 0.0 else 0.0
            case TermKind.VEL_GATE_TWO_SIDED:
                return lambda x, v: v if abs(x) - e > 0.0 else 0.0
            case TermKind.CLEARANCE_SPRING_ONE_SIDED:
                return lambda x, v: x - e if x - e > 0.0 else 0.0
            case TermKind.CLEARANCE_SPRING_TWO_SIDED:
                return lambda x, v: (x - e if x > 0.0 else x + e) if abs(x) - e > 0.0 else 0.0
        raise AssertionError(self.kind)

    def potential(self, x: ArrayLike) -> ArrayLike:
        """강성 항의 위치에너지 형상 ∫₀ˣ term(ξ) dξ."""
        if self.involves_velocity:
            raise InvalidModel(f"{self.label}: 속도 항에는 위치에너지가 없습니다")
        xa = np.asarray(x, dtype=float)
        e = self.clearance
        match self.kind:
            case TermKind.DISP_POWER:
                out = xa ** (self.power + 1) / (self.power + 1)
            case TermKind.CLEARANCE_SPRING_ONE_SIDED:
                out = np.where(xa > e, 0.5 * (xa - e) ** 2, 0.0)
            case _:
                ax = np.abs(xa)
                out = np.where(ax > e, 0.5 * (ax - e) ** 2, 0.0)
        return float(out) if out.ndim == 0 else out


def disp_power(i: int) -> BasisTerm:
    return BasisTerm(TermKind.DISP_POWER, power=i)


def vel_power(j: int) -> BasisTerm:
    return BasisTerm(TermKind.VEL_POWER, power=j)


def mixed_disp_sq_vel() -> BasisTerm:
    return BasisTerm(TermKind.MIXED_DISP_SQ_VEL)


def vel_gate(clearance: float, two_sided: bool = True) -> BasisTerm:
    kind = TermKind.VEL_GATE_TWO_SIDED if two_sided else TermKind.VEL_GATE_ONE_SIDED
    return BasisTerm(kind, clearance=clearance)


def clearance_spring(clearance: float, two_sided: bool = True) -> BasisTerm:
    kind = TermKind.CLEARANCE_SPRING_TWO_SIDED if two_sided else TermKind.CLEARANCE_SPRING_ONE_SIDED
    return BasisTerm(kind, clearance=clearance)


def eval_basis_term(term: BasisTerm, x: ArrayLike, v: ArrayLike) -> ArrayLike:
    """항 값을 평가합니다. 유한 입력에 대해 전역 정의된 순수 함수입니다."""
    return term.evaluate(x, v)


# ── 모델 ──────────────────────────────────────────────────────────

TermCoefficients = tuple[tuple[BasisTerm, float], ...]


def _freeze_terms(terms: Iterable[tuple[BasisTerm, float]], role: str, velocity: bool) -> TermCoefficients:
    frozen: list[tuple[BasisTerm, float]] = []
    seen: set[BasisTerm] = set()
    for term, coef in terms:
        if not isinstance(term, BasisTerm):
            raise InvalidModel(f"{role}: BasisTerm이 아닌 항 {term!r}")
        if term.involves_velocity != velocity:
            expect = "속도를 포함해야" if velocity else "속도를 포함하지 않아야"
            raise InvalidModel(f"{role}: {term.label}: {role} 항은 {expect} 합니다")
        if term in seen:
            raise InvalidModel(f"{role}: 중복 항 {term.label}")
        coef = float(coef)
        if not math.isfinite(coef):
            raise InvalidModel(f"{role}: {term.label} 계수가 유한하지 않습니다 ({coef})")
        seen.add(term)
        frozen.append((term, coef))
    return tuple(frozen)


@dataclass(frozen=True)
class ModelSpec:
    """
    운동방정식 m ẍ + B(x, ẋ, e) + K(x, e) = F(t) 의 모델.

    damping_terms 는 (속도 포함 항, b_j), stiffness_terms 는 (변위 전용 항, k_i) 목록입니다.
    순서가 유지되며, 같은 종류 + 같은 clearance 항은 중복될 수 없습니다.
    """

    mass: float
    damping_terms: TermCoefficients = ()
    stiffness_terms: TermCoefficients = ()

    def __post_init__(self) -> None:
        mass = float(self.mass)
        if not math.isfinite(mass) or mass <= 0:
            raise InvalidModel(f"질량은 양수여야 합니다 (받은 값: {self.mass!r})")
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "damping_terms", _freeze_terms(self.damping_terms, "감쇠", velocity=True))
        object.__setattr__(self, "stiffness_terms", _freeze_terms(self.stiffness_terms, "강성", velocity=False))

    def damping_force(self, x: ArrayLike, v: ArrayLike) -> ArrayLike:
        total: ArrayLike = 0.0 * (np.asarray(x, dtype=float) + np.asarray(v, dtype=float))
        for term, coef in self.damping_terms:
            total = total + coef * term.evaluate(x, v)
        return float(total) if np.ndim(total) == 0 else total

    def stiffness_force(self, x: ArrayLike) -> ArrayLike:
        total: ArrayLike = 0.0 * np.asarray(x, dtype=float)
        for term, coef in self.stiffness_terms:
            total = total + coef * term.evaluate(x, 0.0)
        return float(total) if np.ndim(total) == 0 else total

    def potential_energy(self, x: ArrayLike) -> ArrayLike:
        """∫₀ˣ K(ξ) dξ (J)."""
        total: ArrayLike = 0.0 * np.asarray(x, dtype=float)
        for term, coef in self.stiffness_terms:
            total = total + coef * term.potential(x)
        return float(total) if np.ndim(total) == 0 else total

    def scalar_force_fn(self) -> Callable[[float, float], float]:
        """B(x, v) + K(x) 를 float로 계산하는 함수 (적분기용)."""
        compiled = [(coef, term.scalar_fn()) for term, coef in self.damping_terms + self.stiffness_terms if coef != 0.0]

        def force(x: float, v: float) -> float:
            s = 0.0
            for coef, fn in compiled:
                s += coef * fn(x, v)
            return s

        return force

    def scaled(self, factor: float) -> ModelSpec:
        """질량과 모든 계수에 factor를 곱한 모델 (같은 궤적을 만듭니다)."""
        return ModelSpec(
            self.mass * factor,
            tuple((t, c * factor) for t, c in self.damping_terms),
            tuple((t, c * factor) for t, c in self.stiffness_terms),
        )


def eval_damping_force(spec: ModelSpec, x: ArrayLike, v: ArrayLike) -> ArrayLike:
    """Σ_j b_j B_j(x, v)."""
    return spec.damping_force(x, v)


def eval_stiffness_force(spec: ModelSpec, x: ArrayLike) -> ArrayLike:
    """Σ_i k_i K_i(x)."""
    return spec.stiffness_force(x)


# ── 신호 / 궤적 ───────────────────────────────────────────────────


def _frozen_array(values: Sequence[float] | np.ndarray, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidModel(f"{name}: 1차원 배열이어야 합니다 (shape={arr.shape})")
    if not np.all(np.isfinite(arr)):
        raise InvalidModel(f"{name}: 유한하지 않은 값이 있습니다")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """균일 샘플링된 스칼라 시계열."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidModel(f"dt는 양수여야 합니다 (받은 값: {self.dt!r})")
        if not math.isfinite(self.t0):
            raise InvalidModel("t0가 유한하지 않습니다")
        values = _frozen_array(self.values, "values")
        if values.size < 2:
            raise InvalidModel(f"신호 길이는 2 이상이어야 합니다 (받은 값: {values.size})")
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def fs(self) -> float:
        return 1.0 / self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.values.size - 1)

    def with_values(self, values: np.ndarray) -> SampledSignal:
        return SampledSignal(self.t0, self.dt, values)

    def interp(self, t: ArrayLike) -> ArrayLike:
        """선형 보간. 기록 구간 밖은 0."""
        return np.interp(t, self.times, self.values, left=0.0, right=0.0)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    같은 시간축을 공유하는 변위/속도/가속도/외력 채널과 질량.

    a 는 없을 수 있습니다 (가속도가 필요한 계산은 MissingAcceleration).
    f_ext 를 생략하면 0으로 채웁니다 (자유 응답).
    """

    t0: float
    dt: float
    x: np.ndarray
    v: np.ndarray
    mass: float
    a: np.ndarray | None = None
    f_ext: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidModel(f"dt는 양수여야 합니다 (받은 값: {self.dt!r})")
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise InvalidModel(f"질량은 양수여야 합니다 (받은 값: {self.mass!r})")
        x = _frozen_array(self.x, "x")
        n = x.size
        if n < 2:
            raise InvalidModel(f"궤적 길이는 2 이상이어야 합니다 (받은 값: {n})")
        channels = {"x": x, "v": _frozen_array(self.v, "v")}
        channels["a"] = None if self.a is None else _frozen_array(self.a, "a")
        channels["f_ext"] = _frozen_array(np.zeros(n) if self.f_ext is None else self.f_ext, "f_ext")
        for name, arr in channels.items():
            if arr is not None and arr.size != n:
                raise InvalidModel(f"채널 길이 불일치: {name}={arr.size}, x={n}")
        for name, arr in channels.items():
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "mass", float(self.mass))

    def __len__(self) -> int:
        return self.x.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.x.size)

    @property
    def fs(self) -> float:
        return 1.0 / self.dt

    @property
    def has_acceleration(self) -> bool:
        return self.a is not None

    @property
    def momentum(self) -> np.ndarray:
        """p = m ẋ."""
        return self.mass * self.v

    @property
    def momentum_rate(self) -> np.ndarray | None:
        """ṗ = m ẍ (가속도가 없으면 None)."""
        return None if self.a is None else self.mass * self.a

    @property
    def is_forced(self) -> bool:
        return bool(np.any(self.f_ext != 0.0))

    def signal(self, channel: str) -> SampledSignal:
        values = getattr(self, channel)
        if values is None:
            raise InvalidModel(f"채널 {channel} 이 없습니다")
        return SampledSignal(self.t0, self.dt, values)

    def window(self, start: int, stop: int | None = None) -> Trajectory:
        """샘플 인덱스 구간 [start, stop) 의 부분 궤적."""
        sl = slice(start, stop)
        return Trajectory(
            t0=self.t0 + start * self.dt,
            dt=self.dt,
            x=self.x[sl],
            v=self.v[sl],
            mass=self.mass,
            a=None if self.a is None else self.a[sl],
            f_ext=self.f_ext[sl],
        )


# ── 표준 라이브러리 / 기준 모델 ────────────────────────────────────


def duffing_clearance_damping_library(clearance: float = 0.005) -> list[BasisTerm]:
    """v, v^2, v^3, x^2 v, v H(x-e), v H(|x|-e)."""
    return [
        vel_power(1),
        vel_power(2),
        vel_power(3),
        mixed_disp_sq_vel(),
        vel_gate(clearance, two_sided=False),
        vel_gate(clearance, two_sided=True),
    ]


def duffing_clearance_stiffness_library(clearance: float = 0.005) -> list[BasisTerm]:
    """x … x^5, 편측 간극 스프링, 양측 간극 스프링."""
    return [disp_power(i) for i in range(1, 6)] + [
        clearance_spring(clearance, two_sided=False),
        clearance_spring(clearance, two_sided=True),
    ]


def experimental_damping_library(clearance: float = 0.00535) -> list[BasisTerm]:
    return [vel_power(1), vel_gate(clearance, two_sided=True)]


def experimental_stiffness_library(clearance: float = 0.00535) -> list[BasisTerm]:
    return [disp_power(1), disp_power(2), disp_power(3), clearance_spring(clearance, two_sided=True)]


def duffing_clearance_model(clearance: float = 0.005) -> ModelSpec:
    """간극 비선형성을 가진 해석용 Duffing 진동자 기준 모델."""
    return ModelSpec(
        mass=0.1,
        damping_terms=(
            (vel_power(1), 0.08),
            (mixed_disp_sq_vel(), 2000.0),
            (vel_gate(clearance), 0.2),
        ),
        stiffness_terms=(
            (disp_power(1), 40.0),
            (disp_power(3), 5000.0),
            (clearance_spring(clearance), 200.0),
        ),
    )


def experimental_mirror_model(clearance: float = 0.00535) -> ModelSpec:
    """실험 장치에서 식별된 계수를 그대로 쓴 합성 기준 모델."""
    return ModelSpec(
        mass=0.088,
        damping_terms=(
            (vel_power(1), 0.056),
            (vel_gate(clearance), 0.146),
        ),
        stiffness_terms=(
            (disp_power(1), 33.7),
            (disp_power(2), 145.5),
            (disp_power(3), 1.83e5),
            (clearance_spring(clearance), 195.8),
        ),
    )
