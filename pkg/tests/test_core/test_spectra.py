"""
core/spectra.py 단위 테스트.

Fourier 스펙트럼과 해석적 Morlet 스칼로그램의 성질을 테스트합니다.
"""

import numpy as np
import pytest

from core.errors import FrequencyOutOfRange, InvalidModel
from core.models import SampledSignal
from core.spectra import (
    cone_of_influence,
    cwt_morlet,
    default_frequency_grid,
    fourier_spectrum,
    scalogram_ridge,
)

GRID = default_frequency_grid()
GRID_RATIO = GRID[1] / GRID[0]


def _tone(freq_hz, fs, duration, amplitude=1.0):
    t = np.arange(int(round(duration * fs)) + 1) / fs
    return SampledSignal(0.0, 1.0 / fs, amplitude * np.sin(2 * np.pi * freq_hz * t))


@pytest.fixture(scope="module")
def tone_6hz():
    """6 Hz 정현파 10초, 2 kHz."""
    return _tone(6.0, 2_000.0, 10.0)


# ── 주파수 격자 ──────────────────────────────────────────────────

def test_default_grid_is_log_spaced():
    assert GRID.size == 200
    assert GRID[0] == pytest.approx(1.0)
    assert GRID[-1] == pytest.approx(100.0)
    np.testing.assert_allclose(GRID[1:] / GRID[:-1], GRID_RATIO)


# ── Fourier ──────────────────────────────────────────────────────

def test_fourier_peak_at_tone_frequency():
    """20 kHz 로 샘플한 6 Hz 정현파의 스펙트럼 최대는 6 Hz 이고 크기는 진폭입니다."""
    y = _tone(6.0, 20_000.0, 10.0, amplitude=0.3)
    freqs, mag = fourier_spectrum(y)
    k = int(np.argmax(mag))
    assert freqs[k] == pytest.approx(6.0, abs=0.1)
    assert mag[k] == pytest.approx(0.3, rel=0.02)


def test_fourier_of_constant_is_zero():
    freqs, mag = fourier_spectrum(SampledSignal(0.0, 0.01, np.full(500, 2.5)))
    np.testing.assert_allclose(mag, 0.0, atol=1e-12)
    assert freqs[0] == 0.0


# ── Morlet CWT ───────────────────────────────────────────────────

def test_scalogram_ridge_tracks_tone(tone_6hz):
    """가운데 80% 구간에서 능선은 6 Hz 에서 격자 한 칸 안에 있습니다."""
    scal = cwt_morlet(tone_6hz)
    ridge = scalogram_ridge(scal)
    n = ridge.size
    core = ridge[n // 10: n - n // 10]
    assert np.all(np.abs(np.log(core / 6.0)) <= np.log(GRID_RATIO) * 1.01)


@pytest.mark.parametrize("omega0", [3.0, 12.0])
def test_ridge_does_not_depend_on_omega0(tone_6hz, omega0):
    """ω0 는 각주파수(rad)이므로 s = ω0/(2πf) 에서 능선은 ω0 와 무관하게 6 Hz 입니다."""
    ridge = scalogram_ridge(cwt_morlet(tone_6hz, omega0=omega0))
    n = ridge.size
    core = ridge[n // 10: n - n // 10]
    assert np.all(np.abs(np.log(core / 6.0)) <= np.log(GRID_RATIO) * 1.01)


@pytest.mark.parametrize("omega0", [0.0, -6.0])
def test_non_positive_omega0_rejected(tone_6hz, omega0):
    with pytest.raises(InvalidModel):
        cwt_morlet(tone_6hz, omega0=omega0)


def test_scalogram_normalized_to_one(tone_6hz):
    scal = cwt_morlet(tone_6hz)
    assert scal.magnitude.max() == 1.0
    assert scal.magnitude.min() >= 0.0
    assert scal.shape == (GRID.size, scal.times.size)


def test_scalogram_is_scale_invariant(tone_6hz):
    """신호에 상수를 곱해도 정규화된 스칼로그램은 같습니다."""
    a = cwt_morlet(tone_6hz)
    b = cwt_morlet(tone_6hz.with_values(tone_6hz.values * 37.5))
    np.testing.assert_allclose(a.magnitude, b.magnitude, atol=1e-12)


def test_scalogram_time_columns_limited(tone_6hz):
    """max_time_points 로 출력 시간 열 수를 제한하고 양 끝 시점은 유지합니다."""
    scal = cwt_morlet(tone_6hz, max_time_points=500)
    assert scal.times.size == 500
    assert scal.times[0] == tone_6hz.t0
    assert scal.times[-1] == pytest.approx(tone_6hz.t_end)


def test_zero_signal_gives_zero_scalogram():
    scal = cwt_morlet(SampledSignal(0.0, 1e-3, np.zeros(4000)))
    assert not scal.magnitude.any()
    assert np.all(np.isnan(scalogram_ridge(scal)))


@pytest.mark.parametrize("freqs", [
    np.array([0.0, 10.0]),
    np.array([10.0, 1000.0]),
    np.array([10.0, 2000.0]),
])
def test_frequencies_outside_nyquist_rejected(freqs):
    y = SampledSignal(0.0, 1e-3, np.sin(np.arange(2000) * 0.1))
    with pytest.raises(FrequencyOutOfRange):
        cwt_morlet(y, freqs=freqs)


def test_descending_grid_rejected():
    y = SampledSignal(0.0, 1e-3, np.sin(np.arange(2000) * 0.1))
    with pytest.raises(InvalidModel):
        cwt_morlet(y, freqs=np.array([20.0, 10.0]))


def test_cone_of_influence_grows_toward_edges():
    times = np.linspace(0.0, 10.0, 101)
    coi = cone_of_influence(times, 0.0, 10.0, 6.0, nyquist=1000.0)
    assert coi[0] == 1000.0
    assert coi[50] == pytest.approx(6.0 * np.sqrt(2) / (2 * np.pi * 5.0))
    assert coi[10] > coi[50]


@pytest.mark.slow
def test_duffing_scalogram_frequency_drift(duffing_trajectory):
    """간극 Duffing 응답의 능선은 초반 5–7 Hz, 5초 이후 3–4 Hz 입니다."""
    scal = cwt_morlet(duffing_trajectory.signal("x"))
    ridge = scalogram_ridge(scal)
    # 영향 원뿔(0.25 s 에서 약 5.4 Hz) 바깥만 봅니다
    early = (scal.times >= 0.25) & (scal.times <= 0.5)
    late = (scal.times > 5.0) & (scal.times <= 9.5)
    assert np.all((ridge[early] >= 5.0) & (ridge[early] <= 7.0))
    assert np.all((ridge[late] >= 3.0) & (ridge[late] <= 4.0))
