"""
궤적 / 가속도 / 결과 표 CSV 입출력.

모든 실수는 17 유효자리('%.17g')로 써서 다시 읽으면 같은 값이 되고,
같은 입력이면 바이트 단위로 같은 파일이 나옵니다.

  궤적 CSV   : t,x,v,a,f_ext
  가속도 CSV : t,a[,f_ext]
"""

from __future__ import annotations

from collections.abc import Mapping
from pathlib import Path

import numpy as np
import pandas as pd

from core.errors import DataFormatError, InvalidModel
from core.models import SampledSignal, Trajectory
from core.spectra import Scalogram
from utils.logger import get_logger

log = get_logger("Storage")

FLOAT_FORMAT = "%.17g"
TRAJECTORY_COLUMNS = ("t", "x", "v", "a", "f_ext")
ACCELERATION_COLUMNS = ("t", "a")

# 시간축 균일성 허용오차 (dt 대비)
_DT_RTOL = 1e-6


def write_table(path: Path, columns: Mapping[str, np.ndarray]) -> Path:
    """열 이름 → 1차원 배열을 CSV 로 씁니다. 상위 디렉터리는 만들어 둡니다."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({name: np.asarray(values, dtype=float) for name, values in columns.items()})
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep="nan")
    log.ok("저장", f"{path} ({len(frame)}행)")
    return path


def read_table(path: Path) -> pd.DataFrame:
    """
    숫자 CSV 를 읽습니다.

    Raises:
        FileNotFoundError: 파일이 없을 때.
        DataFormatError: 비었거나 숫자가 아닌 값이 있을 때.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"입력 파일 없음: {path}")
    try:
        frame = pd.read_csv(path, dtype=float, float_precision="round_trip")
    except (pd.errors.EmptyDataError, pd.errors.ParserError, ValueError) as e:
        raise DataFormatError(f"{path}: CSV 를 읽을 수 없습니다 ({e})") from None
    frame.columns = [str(c).strip() for c in frame.columns]
    if frame.empty:
        raise DataFormatError(f"{path}: 데이터 행이 없습니다")
    if not np.all(np.isfinite(frame.to_numpy())):
        raise DataFormatError(f"{path}: NaN/Inf 또는 빈 칸이 있습니다")
    return frame


def _uniform_dt(t: np.ndarray, path: Path) -> float:
    if t.size < 2:
        raise DataFormatError(f"{path}: 샘플이 2개 이상 필요합니다 ({t.size})")
    dt = (t[-1] - t[0]) / (t.size - 1)
    if not dt > 0 or np.max(np.abs(np.diff(t) - dt)) > _DT_RTOL * dt:
        raise DataFormatError(f"{path}: 시간축이 균일한 오름차순 격자가 아닙니다")
    return float(dt)


def _require(frame: pd.DataFrame, required: tuple[str, ...], path: Path) -> None:
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataFormatError(f"{path}: 필수 열 {missing} 이 없습니다 (헤더: {list(frame.columns)})")


# ── 궤적 ─────────────────────────────────────────────────────────


def write_trajectory(traj: Trajectory, path: Path) -> Path:
    if traj.a is None:
        raise DataFormatError("궤적 CSV 에는 가속도 채널이 필요합니다")
    return write_table(path, {"t": traj.times, "x": traj.x, "v": traj.v, "a": traj.a, "f_ext": traj.f_ext})


def read_trajectory(path: Path, mass: float) -> Trajectory:
    """t,x,v,a,f_ext CSV → Trajectory. f_ext 열은 생략 가능(0)."""
    path = Path(path)
    frame = read_table(path)
    _require(frame, TRAJECTORY_COLUMNS[:4], path)
    t = frame["t"].to_numpy()
    dt = _uniform_dt(t, path)
    try:
        return Trajectory(
            t0=float(t[0]),
            dt=dt,
            x=frame["x"].to_numpy(),
            v=frame["v"].to_numpy(),
            mass=mass,
            a=frame["a"].to_numpy(),
            f_ext=frame["f_ext"].to_numpy() if "f_ext" in frame.columns else None,
        )
    except InvalidModel as e:
        raise DataFormatError(f"{path}: {e}") from None


def read_acceleration(path: Path) -> tuple[SampledSignal, SampledSignal | None]:
    """t,a[,f_ext] CSV → (가속도 신호, 외력 신호 또는 None)."""
    path = Path(path)
    frame = read_table(path)
    _require(frame, ACCELERATION_COLUMNS, path)
    t = frame["t"].to_numpy()
    dt = _uniform_dt(t, path)
    try:
        a = SampledSignal(float(t[0]), dt, frame["a"].to_numpy())
        f_ext = SampledSignal(float(t[0]), dt, frame["f_ext"].to_numpy()) if "f_ext" in frame.columns else None
    except InvalidModel as e:
        raise DataFormatError(f"{path}: {e}") from None
    return a, f_ext


def is_trajectory_file(path: Path) -> bool:
    """헤더에 x, v 열이 있으면 궤적 CSV, 아니면 가속도 CSV 로 봅니다."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"입력 파일 없음: {path}")
    try:
        header = pd.read_csv(path, nrows=0).columns
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise DataFormatError(f"{path}: CSV 헤더를 읽을 수 없습니다 ({e})") from None
    names = {str(c).strip() for c in header}
    return {"x", "v"} <= names


# ── 스칼로그램 ───────────────────────────────────────────────────


def write_scalogram(scalogram: Scalogram, path: Path) -> Path:
    """
    첫 행은 주파수, 첫 열은 시간인 격자 CSV.

    헤더는 't' 다음에 주파수(Hz) 값들이고, 각 행은 한 시점의 크기입니다.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ["t"] + [FLOAT_FORMAT % f for f in scalogram.freqs]
    frame = pd.DataFrame(
        np.column_stack([scalogram.times, scalogram.magnitude.T]),
        columns=header,
    )
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    log.ok("저장", f"{path} ({scalogram.freqs.size}×{scalogram.times.size})")
    return path


def read_scalogram(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """write_scalogram 형식 → (freqs, times, magnitude[freq, time])."""
    frame = read_table(path)
    _require(frame, ("t",), Path(path))
    try:
        freqs = np.array([float(c) for c in frame.columns[1:]])
    except ValueError:
        raise DataFormatError(f"{path}: 주파수 헤더를 해석할 수 없습니다") from None
    times = frame["t"].to_numpy()
    magnitude = frame.iloc[:, 1:].to_numpy().T
    return freqs, times, magnitude
