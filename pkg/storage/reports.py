"""
식별 보고서(JSON) 스키마와 입출력.

보고서에는 벽시계 시각을 넣지 않습니다. 같은 설정과 입력이면 같은 바이트가 나와야 하므로
출처(provenance)는 설정·입력 파일 해시와 데이터 기록 구간만 담습니다.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.errors import DataFormatError
from core.models import BasisTerm, ModelSpec, TermKind
from utils.logger import get_logger

log = get_logger("Reports")

REPORT_SCHEMA_VERSION = 1
REPORT_SEED = 0  # 파이프라인에 난수가 없음을 기록


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TermRecord(_Strict):
    """계수표 한 행: 항 설명자 + 값 + 단위."""

    kind: TermKind
    power: int | None = None
    clearance: float | None = None
    label: str
    value: float
    unit: str

    @classmethod
    def from_term(cls, term: BasisTerm, value: float) -> TermRecord:
        return cls(**term.descriptor(), label=term.label, value=float(value), unit=term.coefficient_unit)

    def to_term(self) -> BasisTerm:
        return BasisTerm(self.kind, self.power, self.clearance)


class ModelRecord(_Strict):
    mass: float
    damping: list[TermRecord] = Field(default_factory=list)
    stiffness: list[TermRecord] = Field(default_factory=list)

    @classmethod
    def from_spec(cls, spec: ModelSpec) -> ModelRecord:
        return cls(
            mass=spec.mass,
            damping=[TermRecord.from_term(t, c) for t, c in spec.damping_terms],
            stiffness=[TermRecord.from_term(t, c) for t, c in spec.stiffness_terms],
        )

    def to_spec(self) -> ModelSpec:
        return ModelSpec(
            self.mass,
            tuple((r.to_term(), r.value) for r in self.damping),
            tuple((r.to_term(), r.value) for r in self.stiffness),
        )


class ResidualRecord(_Strict):
    stage: str
    residual_norm: float
    relative_residual: float
    condition_estimate: float | None = None
    n_rows: int


class ValidationRecord(_Strict):
    ic: tuple[float, float]
    nrmse: float | None = None


class Provenance(_Strict):
    config_sha256: str
    input_sha256: str
    seed: int = REPORT_SEED
    timestamps: tuple[float, float]  # 데이터 기록의 (t0, tN)


class EnergyRecord(_Strict):
    """식별된 감쇠 모델의 에너지 수지 요약 (J). initial − dissipated = final."""

    gamma0: float
    initial_energy: float
    dissipated: float
    final_mechanical: float


class IdentificationReport(_Strict):
    schema_version: Literal[1] = REPORT_SCHEMA_VERSION
    method: Literal["eddi", "sindy"]
    model: ModelRecord
    residuals: list[ResidualRecord] = Field(default_factory=list)
    validation: list[ValidationRecord] = Field(default_factory=list)
    provenance: Provenance
    thresholded: list[str] = Field(default_factory=list)
    clearance_scan: list[tuple[float, float]] = Field(default_factory=list)
    iterations: int | None = None
    energy: EnergyRecord | None = None

    def to_model_spec(self) -> ModelSpec:
        return self.model.to_spec()


def finite_or_none(value: float | None) -> float | None:
    """JSON 에 NaN/Inf 를 쓰지 않기 위해 유한하지 않은 값은 None."""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_report(report: IdentificationReport, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(report.model_dump(mode="json"), indent=2, ensure_ascii=False, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")
    log.ok("저장", f"{path} ({report.method}, 항 {len(report.model.damping) + len(report.model.stiffness)}개)")
    return path


def read_report(path: Path) -> IdentificationReport:
    """
    Raises:
        FileNotFoundError: 파일이 없을 때.
        DataFormatError: JSON 문법 또는 스키마 오류.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"보고서 파일 없음: {path}")
    try:
        return IdentificationReport.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise DataFormatError(f"{path}: 보고서 형식 오류\n{e}") from None


def list_reports(directory: Path) -> list[Path]:
    """디렉터리 안의 *_report.json 경로 (이름순)."""
    return sorted(Path(directory).glob("*_report.json"))
