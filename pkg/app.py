"""eddikit CLI 진입점.

명령: simulate / identify / validate / spectra / report / presets
종료 코드: 0 성공, 2 설정 오류, 3 수치 계산 실패, 4 입출력·데이터 형식 오류, 1 그 밖의 오류

--config 에 'preset:<이름>' 을 주면 내장 프리셋(presets/*.toml)을 씁니다.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from dotenv import load_dotenv

from cli_app import handlers
from core.errors import EXIT_OK, EXIT_UNEXPECTED, ConfigError, exit_code_for
from presets import list_presets, preset_path
from utils.logger import get_logger, set_quiet

log = get_logger("App")

_PRESET_PREFIX = "preset:"


def resolve_config(value: str | None) -> Path | None:
    if value is None:
        return None
    if value.startswith(_PRESET_PREFIX):
        return preset_path(value[len(_PRESET_PREFIX):])
    return Path(value)


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise ConfigError(f"{args.command}: {', '.join(missing)} 옵션이 필요합니다")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eddikit",
        description="간극 비선형 진동자의 에너지 기반 운동방정식 식별 (EDDI / SINDy)",
    )
    parser.add_argument("--quiet", action="store_true", help="경고 이상만 터미널에 출력")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config: bool = True, input_: bool = False) -> None:
        if config:
            p.add_argument("--config", type=str, help="실행 설정 TOML 경로 또는 preset:<이름>")
        if input_:
            p.add_argument("--input", type=str, help="입력 파일 경로")
        p.add_argument("--out", type=str, default=None, help="출력 디렉터리 (또는 파일)")
        p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)

    common(sub.add_parser("simulate", help="정답 모델 시뮬레이션 → 궤적 CSV"))
    p_id = sub.add_parser("identify", help="궤적 → 식별 보고서 JSON")
    common(p_id, input_=True)
    p_id.add_argument("--method", choices=["eddi", "sindy", "both"], default=None)
    common(sub.add_parser("validate", help="보고서 모델 교차 초기조건 검증 (--input 은 보고서 JSON)"), input_=True)
    common(sub.add_parser("spectra", help="Fourier 스펙트럼 + Morlet 스칼로그램"), input_=True)
    common(sub.add_parser("report", help="보고서 디렉터리 → Markdown 비교표 (--input 은 디렉터리)"), input_=True)
    sub.add_parser("presets", help="내장 프리셋 목록")
    return parser


def run(args: argparse.Namespace) -> None:
    config = resolve_config(getattr(args, "config", None))
    out = Path(args.out) if getattr(args, "out", None) else None
    match args.command:
        case "simulate":
            _require(args, "config")
            handlers.cmd_simulate(config, out)
        case "identify":
            _require(args, "config", "input")
            handlers.cmd_identify(config, Path(args.input), out, method=args.method)
        case "validate":
            _require(args, "config", "input")
            handlers.cmd_validate(Path(args.input), config, out)
        case "spectra":
            _require(args, "input")
            handlers.cmd_spectra(Path(args.input), out, config_path=config)
        case "report":
            _require(args, "input")
            handlers.cmd_report(Path(args.input), out, config_path=config)
        case "presets":
            for name in list_presets():
                print(name)


def main(argv: list[str] | None = None) -> int:
    load_dotenv(override=False)
    args = build_parser().parse_args(argv)
    set_quiet(args.quiet)
    try:
        run(args)
    except Exception as exc:  # noqa: BLE001
        code = exit_code_for(exc)
        log.error(args.command, str(exc))
        if code == EXIT_UNEXPECTED:
            log.error(args.command, f"예상하지 못한 오류 ({type(exc).__name__})")
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
