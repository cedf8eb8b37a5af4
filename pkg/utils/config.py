"""
환경변수 설정 로더.

.env 파일에서 프로세스 수준 설정(병렬도, 로그 디렉터리)을 읽어 Settings 객체로 반환합니다.
값이 없으면 기본값을 쓰고, 형식이 잘못된 값은 ConfigError(종료 코드 2)를 발생시킵니다.
실행 단위 설정(모델, 시뮬레이션, 라이브러리)은 cli_app/run_config.py의 TOML 파일이 담당합니다.
"""

import os
import warnings
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

from core.errors import ConfigError

THREADS_KEY = "EDDIKIT_THREADS"
LOG_DIR_KEY = "EDDIKIT_LOG_DIR"

_DEFAULT_THREADS = 1
_DEFAULT_LOG_DIR = "logs"
_MAX_THREADS = 64


@dataclass(frozen=True)
class Settings:
    threads: int = _DEFAULT_THREADS
    log_dir: Path = Path(_DEFAULT_LOG_DIR)


def _parse_threads(raw: str | None) -> int:
    if raw is None or raw.strip() == "":
        return _DEFAULT_THREADS
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(
            f"❌ {THREADS_KEY}={raw!r} 는 정수가 아닙니다. 양의 정수를 지정하세요."
        ) from None
    if value < 1:
        raise ConfigError(f"❌ {THREADS_KEY}={value} 는 1 이상이어야 합니다.")
    if value > _MAX_THREADS:
        warnings.warn(
            f"⚠️ {THREADS_KEY}={value} 가 너무 큽니다. {_MAX_THREADS}로 제한합니다.",
            stacklevel=3,
        )
        value = _MAX_THREADS
    return value


def load_log_dir(env_path: Path | None = None) -> Path:
    """.env 를 로드하고 로그 디렉터리만 읽습니다. 병렬도는 검증하지 않습니다."""
    load_dotenv(env_path, override=False)
    return Path(os.getenv(LOG_DIR_KEY) or _DEFAULT_LOG_DIR)


def load_config(env_path: Path | None = None) -> Settings:
    """
    .env 파일을 로드하고 Settings 객체를 반환합니다.

    Args:
        env_path: .env 파일 경로. None이면 현재 디렉터리의 .env를 자동 탐색합니다.

    Returns:
        Settings: 환경변수가 담긴 설정 객체.

    Raises:
        ConfigError: EDDIKIT_THREADS 형식이 잘못되었을 때.
    """
    log_dir = load_log_dir(env_path)
    threads = _parse_threads(os.getenv(THREADS_KEY))

    return Settings(threads=threads, log_dir=log_dir)
