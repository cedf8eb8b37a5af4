"""
도메인 예외 계층.

모든 예외는 ValueError를 상속하는 EddiError에서 파생됩니다.
CLI는 exit_code_for()로 예외 종류에 맞는 종료 코드를 고릅니다.

  ConfigError     → 2 (설정 파일 / 모델 정의 오류)
  NumericalError  → 3 (적분·식별 등 수치 계산 실패)
  DataFormatError → 4 (CSV/JSON 형식 오류, OSError와 같은 코드)
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


class EddiError(ValueError):
    """eddikit 공통 예외."""


# ── 설정 / 모델 정의 ──────────────────────────────────────────────


class ConfigError(EddiError):
    """실행 설정 파일이 문법·스키마에 맞지 않을 때."""


class InvalidModel(ConfigError):
    """BasisTerm / ModelSpec / 신호 타입의 불변조건 위반."""


class DataFormatError(EddiError):
    """CSV·JSON 입력 파일의 헤더나 값이 기대와 다를 때."""


# ── 수치 계산 ─────────────────────────────────────────────────────


class NumericalError(EddiError):
    """수치 계산 실패 공통 부모."""


class StepSizeUnderflow(NumericalError):
    """적분 스텝이 최소 스텝보다 작아졌을 때 (강성 또는 특이점)."""


class NonFiniteState(NumericalError):
    """적분 중 NaN/Inf 상태가 나타났을 때."""


class NoCrossings(NumericalError):
    """변위 영점 교차가 2개 미만이라 식별이 불가능할 때."""

    def __init__(self, message: str, hint: str = "") -> None:
        super().__init__(f"{message}: {hint}" if hint else message)
        self.hint = hint


class InsufficientCrossings(NumericalError):
    """트리밍 후 Phase 1 방정식을 만들 교차점이 부족할 때."""


class EmptyLibrary(NumericalError):
    """후보 함수 라이브러리가 비어 있을 때."""


class NonFiniteInput(NumericalError):
    """최소제곱 입력 행렬/벡터에 NaN/Inf가 있을 때."""


class MissingAcceleration(NumericalError):
    """가속도 채널이 필요한 계산에 가속도가 없을 때."""


class AllTermsEliminated(NumericalError):
    """STLS 임계값이 모든 항을 제거했을 때."""


class CutoffOutOfRange(NumericalError):
    """필터 차단주파수가 (0, Nyquist) 범위를 벗어났을 때."""


class FrequencyOutOfRange(NumericalError):
    """CWT 주파수 격자가 (0, Nyquist) 범위를 벗어났을 때."""


def exit_code_for(exc: BaseException) -> int:
    """예외를 CLI 종료 코드로 변환합니다."""
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(exc, (DataFormatError, OSError)):
        return EXIT_IO
    return EXIT_UNEXPECTED
