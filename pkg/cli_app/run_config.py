"""
실행 설정(TOML) 스키마.

schema_version = 1 이 반드시 있어야 하고, 모르는 키는 모두 오류입니다.
TOML 문법 오류는 줄/열 위치를, 스키마 오류는 점 표기 키 경로를 담은 ConfigError 로 바뀝니다.

  [model]        질량과 정답 모델 항 (시뮬레이션 / 검증 기준)
  [sim]          적분 구간, 초기조건, 허용오차, 출력 샘플링, [sim.impulse]
  [library]      감쇠·강성 후보 항, 간극 탐색 격자
  [method]       eddi | sindy | both, λ, 반복 수, 계수 임계값
  [preprocess]   필터, 교차점 트리밍, 가속도 재구성 여부
  [validation]   추가 초기조건 목록
  [output]       출력 디렉터리, 그림 여부, 스칼로그램 시점 수
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.errors import ConfigError, InvalidModel
from core.models import BasisTerm, ModelSpec, TermKind
from core.pipeline import EddiOptions
from core.preprocess import (
    DEFAULT_CUTOFF_HZ,
    DEFAULT_ENERGY_FLOOR,
    DEFAULT_FILTER_ORDER,
    DEFAULT_FORCE_THRESHOLD,
)
from core.simulator import ImpulseForce, SimConfig
from core.sindy import DEFAULT_LAMBDA, DEFAULT_MAX_ITERS, StlsConfig
from core.spectra import DEFAULT_MAX_TIME_POINTS, DEFAULT_OMEGA0

SCHEMA_VERSION = 1


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TermConfig(_Section):
    kind: TermKind
    power: int | None = None
    clearance: float | None = None

    def to_term(self) -> BasisTerm:
        return BasisTerm(self.kind, self.power, self.clearance)


class ModelTermConfig(TermConfig):
    coefficient: float


class ModelSection(_Section):
    mass: float = Field(gt=0)
    damping: list[ModelTermConfig] = Field(default_factory=list)
    stiffness: list[ModelTermConfig] = Field(default_factory=list)

    @property
    def has_terms(self) -> bool:
        return bool(self.damping or self.stiffness)


class ImpulseSection(_Section):
    amplitude: float = Field(gt=0)
    t_center: float
    width: float = Field(gt=0)


class SimSection(_Section):
    t_span: tuple[float, float]
    ic: tuple[float, float] = (0.0, 1.0)
    rel_tol: float = 1e-12
    abs_tol: float = 1e-16
    output_rate: float = 20_000.0
    dt_min: float | None = None
    impulse: ImpulseSection | None = None


class LibrarySection(_Section):
    damping: list[TermConfig] = Field(default_factory=list)
    stiffness: list[TermConfig] = Field(default_factory=list)
    clearance_search: list[float] = Field(default_factory=list)


class MethodSection(_Section):
    method: Literal["eddi", "sindy", "both"] = "both"
    sindy_lambda: float = Field(default=DEFAULT_LAMBDA, ge=0)
    sindy_max_iters: int = Field(default=DEFAULT_MAX_ITERS, ge=1)
    coefficient_threshold: float = Field(default=0.0, ge=0)


class PreprocessSection(_Section):
    filter_order: int = Field(default=DEFAULT_FILTER_ORDER, ge=1)
    cutoff_hz: float = Field(default=DEFAULT_CUTOFF_HZ, gt=0)
    force_threshold: float = Field(default=DEFAULT_FORCE_THRESHOLD, ge=0)
    energy_floor: float = Field(default=DEFAULT_ENERGY_FLOOR, ge=0)
    crossing_t_end: float | None = None
    reconstruct: bool = False


class ValidationSection(_Section):
    ics: list[tuple[float, float]] = Field(default_factory=list)


class OutputSection(_Section):
    directory: str = "out"
    plots: bool = True
    scalogram_time_points: int = Field(default=DEFAULT_MAX_TIME_POINTS, ge=2)
    omega0: float = Field(default=DEFAULT_OMEGA0, gt=0)  # Morlet ω0 (rad)
    spectra_channel: Literal["x", "v", "a"] = "x"


class RunConfig(_Section):
    schema_version: Literal[1]
    model: ModelSection
    sim: SimSection | None = None
    library: LibrarySection | None = None
    method: MethodSection = Field(default_factory=MethodSection)
    preprocess: PreprocessSection = Field(default_factory=PreprocessSection)
    validation: ValidationSection = Field(default_factory=ValidationSection)
    output: OutputSection = Field(default_factory=OutputSection)

    # ── 모듈 타입으로 변환 ──

    def to_model_spec(self) -> ModelSpec:
        return ModelSpec(
            self.model.mass,
            tuple((t.to_term(), t.coefficient) for t in self.model.damping),
            tuple((t.to_term(), t.coefficient) for t in self.model.stiffness),
        )

    def reference_model(self) -> ModelSpec | None:
        """정답 모델 항이 있으면 ModelSpec, 질량만 있으면 None."""
        return self.to_model_spec() if self.model.has_terms else None

    def sim_config(self, ic: tuple[float, float] | None = None) -> SimConfig:
        if self.sim is None:
            raise ConfigError("[sim] 섹션이 필요합니다")
        sim = self.sim
        forcing = None
        if sim.impulse is not None:
            forcing = ImpulseForce(sim.impulse.amplitude, sim.impulse.t_center, sim.impulse.width)
        return SimConfig(
            t_span=sim.t_span,
            ic=ic if ic is not None else sim.ic,
            rel_tol=sim.rel_tol,
            abs_tol=sim.abs_tol,
            output_rate=sim.output_rate,
            forcing=forcing,
            dt_min=sim.dt_min,
        )

    def _library(self) -> LibrarySection:
        if self.library is None:
            raise ConfigError("[library] 섹션이 필요합니다")
        return self.library

    def damping_library(self) -> list[BasisTerm]:
        return [t.to_term() for t in self._library().damping]

    def stiffness_library(self) -> list[BasisTerm]:
        return [t.to_term() for t in self._library().stiffness]

    def stls_config(self) -> StlsConfig:
        return StlsConfig(threshold=self.method.sindy_lambda, max_iters=self.method.sindy_max_iters)

    def eddi_options(self) -> EddiOptions:
        return EddiOptions(
            force_threshold=self.preprocess.force_threshold,
            energy_floor=self.preprocess.energy_floor,
            crossing_t_end=self.preprocess.crossing_t_end,
            coefficient_threshold=self.method.coefficient_threshold,
            clearance_candidates=tuple(self._library().clearance_search),
        )

    def methods(self) -> list[str]:
        return ["eddi", "sindy"] if self.method.method == "both" else [self.method.method]


def _format_validation_error(e: ValidationError, source: str) -> str:
    lines = [f"{source}: 설정 스키마 오류"]
    for err in e.errors():
        key = ".".join(str(p) for p in err["loc"]) or "(root)"
        lines.append(f"  {key}: {err['msg']}")
    return "\n".join(lines)


def parse_run_config(text: str, source: str = "<config>") -> RunConfig:
    """
    TOML 문자열을 RunConfig 로 파싱합니다.

    Raises:
        ConfigError: TOML 문법 오류(줄/열 포함), 스키마 오류(키 경로 포함), 모델 불변조건 위반.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{source}: TOML 문법 오류: {e}") from None
    if "schema_version" not in data:
        raise ConfigError(f"{source}: schema_version = {SCHEMA_VERSION} 키가 필요합니다")
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_validation_error(e, source)) from None
    # BasisTerm / ModelSpec 불변조건은 지금 확인
    try:
        cfg.to_model_spec()
        if cfg.sim is not None:
            cfg.sim_config()
        if cfg.library is not None:
            cfg.damping_library()
            cfg.stiffness_library()
    except InvalidModel as e:
        raise InvalidModel(f"{source}: {e}") from None
    return cfg


def load_run_config(path: Path) -> RunConfig:
    """
    Raises:
        FileNotFoundError: 파일이 없을 때.
        ConfigError: parse_run_config 참고.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"설정 파일 없음: {path}")
    return parse_run_config(path.read_text(encoding="utf-8"), source=str(path))
