"""
내장 실행 설정 로더.

presets/ 디렉토리의 .toml 파일을 읽어 RunConfig 또는 원문으로 반환합니다.
"""

from pathlib import Path

from cli_app.run_config import RunConfig, parse_run_config

_DIR = Path(__file__).parent


def preset_path(name: str) -> Path:
    """
    프리셋 파일 경로를 반환합니다.

    Args:
        name: 파일명 (확장자 없이). 예: "duffing_clearance"

    Raises:
        FileNotFoundError: 파일이 없을 때.
    """
    path = _DIR / f"{name}.toml"
    if not path.exists():
        raise FileNotFoundError(f"프리셋 파일 없음: {path}")
    return path


def load_preset_text(name: str) -> str:
    return preset_path(name).read_text(encoding="utf-8")


def load_preset(name: str) -> RunConfig:
    """프리셋을 읽어 검증된 RunConfig 로 반환합니다."""
    return parse_run_config(load_preset_text(name), source=f"preset:{name}")


def list_presets() -> list[str]:
    """사용 가능한 프리셋 이름 목록을 반환합니다."""
    return sorted(p.stem for p in _DIR.glob("*.toml"))
