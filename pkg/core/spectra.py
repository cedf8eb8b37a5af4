"""
시간-주파수 진단: 단측 Fourier 크기 스펙트럼과 Morlet CWT 스칼로그램.

CWT 는 주파수 영역 곱으로 계산합니다. 해석적(analytic) Morlet 을 L1 정규화하므로
같은 진폭의 정현파는 주파수와 무관하게 같은 크기의 능선을 만듭니다.
스칼로그램은 전체 최대값 1로 정규화합니다 (신호가 모두 0이면 정규화하지 않음).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from core.errors import FrequencyOutOfRange, InvalidModel
from core.models import SampledSignal
from utils.logger import get_logger

log = get_logger("Spectra")

DEFAULT_OMEGA0 = 6.0  # Morlet 중심 각주파수 ω0 (rad, 무차원)
DEFAULT_F_MIN_HZ = 1.0
DEFAULT_F_MAX_HZ = 100.0
DEFAULT_N_FREQS = 200
DEFAULT_MAX_TIME_POINTS = 2000


def default_frequency_grid(
    f_min: float = DEFAULT_F_MIN_HZ,
    f_max: float = DEFAULT_F_MAX_HZ,
    n: int = DEFAULT_N_FREQS,
) -> np.ndarray:
    """로그 간격 주파수 격자 (Hz, 오름차순)."""
    if not (0 < f_min < f_max) or n < 2:
        raise InvalidModel(f"주파수 격자 설정 오류: f_min={f_min}, f_max={f_max}, n={n}")
    return np.geomspace(f_min, f_max, n)


# ── Fourier ──────────────────────────────────────────────────────


def fourier_spectrum(y: SampledSignal) -> tuple[np.ndarray, np.ndarray]:
    """
    평균을 뺀 신호의 단측 크기 스펙트럼.

    진폭 A 의 정현파는 해당 빈에서 ≈ A 가 되도록 2/n 으로 스케일합니다.
    주파수 분해능은 1/(n·dt) 입니다.
    """
    values = y.values - y.values.mean()
    n = values.size
    spectrum = np.abs(sfft.rfft(values)) * (2.0 / n)
    spectrum[0] *= 0.5
    if n % 2 == 0:
        spectrum[-1] *= 0.5
    freqs = sfft.rfftfreq(n, d=y.dt)
    return freqs, spectrum


# ── CWT ──────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class Scalogram:
    """
    freqs (Hz, 오름차순) × times (s) 크기 격자.

    coi 는 각 시각의 영향 원뿔 경계 주파수(Hz)입니다. 이보다 낮은 주파수는
    기록 가장자리 효과를 받습니다. 마스킹하지 않고 함께 내보내기만 합니다.
    """

    freqs: np.ndarray
    times: np.ndarray
    magnitude: np.ndarray
    coi: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.magnitude.shape


def _time_columns(n: int, max_points: int | None) -> np.ndarray:
    if max_points is None or max_points >= n:
        return np.arange(n)
    if max_points < 2:
        raise InvalidModel(f"max_time_points 는 2 이상이어야 합니다 ({max_points})")
    return np.unique(np.round(np.linspace(0, n - 1, max_points)).astype(int))


def cone_of_influence(times: np.ndarray, t0: float, t_end: float, omega0: float, nyquist: float) -> np.ndarray:
    """
    Morlet e-폴딩 시간 √2·s 로 정한 영향 원뿔 (Hz).

    가장자리까지 거리 d 에서 s = d/√2, f = ω0 / (2π s). Nyquist 로 자릅니다.
    """
    d = np.minimum(times - t0, t_end - times)
    with np.errstate(divide="ignore"):
        f = omega0 * math.sqrt(2.0) / (2.0 * math.pi * d)
    return np.minimum(f, nyquist)


def cwt_morlet(
    y: SampledSignal,
    freqs: np.ndarray | None = None,
    omega0: float = DEFAULT_OMEGA0,
    max_time_points: int | None = DEFAULT_MAX_TIME_POINTS,
) -> Scalogram:
    """
    해석적 Morlet 연속 웨이블릿 변환 크기.

    Ψ̂(sω) = 2 · exp(−(sω − ω0)² / 2),  ω > 0
    s = ω0 / (2π f)

    평균 제거 후 2배 이상 0 패딩(순환 중첩 방지)하여 FFT 합성곱을 합니다.
    max_time_points 가 주어지면 출력 시간 열을 균일하게 솎아 메모리를 제한합니다.

    Raises:
        FrequencyOutOfRange: freqs 가 (0, Nyquist) 밖일 때.
    """
    if not omega0 > 0:
        raise InvalidModel(f"Morlet 중심 각주파수 ω0 는 양수여야 합니다 ({omega0})")
    freqs = default_frequency_grid() if freqs is None else np.asarray(freqs, dtype=float)
    nyquist = 0.5 * y.fs
    if freqs.ndim != 1 or freqs.size < 1:
        raise InvalidModel("주파수 격자는 비어 있지 않은 1차원 배열이어야 합니다")
    if np.any(np.diff(freqs) <= 0):
        raise InvalidModel("주파수 격자는 엄격히 오름차순이어야 합니다")
    if freqs[0] <= 0 or freqs[-1] >= nyquist:
        raise FrequencyOutOfRange(
            f"주파수 [{freqs[0]:g}, {freqs[-1]:g}] Hz 가 (0, {nyquist:g}) Hz 범위를 벗어났습니다"
        )

    n = len(y)
    cols = _time_columns(n, max_time_points)
    times = y.times[cols]
    coi = cone_of_influence(times, y.t0, y.t_end, omega0, nyquist)

    values = y.values - y.values.mean()
    if not np.any(values):
        log.warn("CWT", "신호가 모두 0이라 정규화를 건너뜁니다")
        return Scalogram(freqs=freqs, times=times, magnitude=np.zeros((freqs.size, cols.size)), coi=coi)

    log.start(f"Morlet CWT ({freqs.size} 주파수 × {cols.size} 시점, ω0={omega0:g})")
    n_fft = sfft.next_fast_len(2 * n)
    spectrum = sfft.fft(values, n_fft)
    omega = 2.0 * math.pi * sfft.fftfreq(n_fft, d=y.dt)
    positive = omega > 0

    magnitude = np.empty((freqs.size, cols.size))
    for i, f in enumerate(freqs):
        s = omega0 / (2.0 * math.pi * f)
        psi = np.zeros(n_fft)
        psi[positive] = 2.0 * np.exp(-0.5 * (s * omega[positive] - omega0) ** 2)
        row = sfft.ifft(spectrum * psi)[:n]
        magnitude[i] = np.abs(row[cols])

    peak = magnitude.max()
    if peak > 0:
        magnitude /= peak
    log.finish("Morlet CWT")
    return Scalogram(freqs=freqs, times=times, magnitude=magnitude, coi=coi)


def scalogram_ridge(scalogram: Scalogram) -> np.ndarray:
    """시간 열마다 크기가 최대인 주파수 (Hz). 크기가 모두 0인 열은 NaN."""
    idx = np.argmax(scalogram.magnitude, axis=0)
    ridge = scalogram.freqs[idx].astype(float)
    ridge[scalogram.magnitude.max(axis=0) <= 0] = np.nan
    return ridge
