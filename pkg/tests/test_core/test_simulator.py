"""
core/simulator.py 단위 테스트.

설정 검증, 해석해 대비 정확도, 에너지 보존, 충격 외력, 수치 실패 처리를 테스트합니다.
"""

import math

import numpy as np
import pytest

from core.errors import InvalidModel, NumericalError, StepSizeUnderflow
from core.models import ModelSpec, disp_power
from core.simulator import ImpulseForce, SimConfig, impulse_force, mechanical_energy, simulate


@pytest.fixture(scope="module")
def undamped_linear():
    return ModelSpec(1.0, (), ((disp_power(1), 100.0),))


@pytest.fixture(scope="module")
def undamped_trajectory(undamped_linear):
    cfg = SimConfig(t_span=(0.0, 2.0), ic=(0.0, 1.0), output_rate=2_000.0)
    return simulate(undamped_linear, cfg)


# ── SimConfig ────────────────────────────────────────────────────

def test_sample_count_includes_both_ends():
    """10초 × 20 kHz 는 200001 샘플이고 마지막 시점은 t_end 입니다."""
    cfg = SimConfig(t_span=(0.0, 10.0), ic=(0.0, 1.0))
    assert cfg.n_samples == 200_001
    assert cfg.output_times()[-1] == 10.0
    assert cfg.dt_max == pytest.approx(1.25e-5)


@pytest.mark.parametrize("kwargs", [
    {"t_span": (1.0, 1.0)},
    {"t_span": (2.0, 1.0)},
    {"t_span": (0.0, math.inf)},
    {"rel_tol": 0.0},
    {"abs_tol": 1.5},
    {"output_rate": 0.0},
    {"ic": (math.nan, 0.0)},
    {"dt_min": -1e-9},
])
def test_invalid_sim_config(kwargs):
    """잘못된 구간·허용오차·초기조건은 InvalidModel 입니다."""
    params = {"t_span": (0.0, 1.0), "ic": (0.0, 1.0)} | kwargs
    with pytest.raises(InvalidModel):
        SimConfig(**params)


def test_with_ic_keeps_other_settings():
    cfg = SimConfig(t_span=(0.0, 1.0), ic=(0.0, 1.0), rel_tol=1e-9, output_rate=500.0)
    other = cfg.with_ic(0.1, -0.2)
    assert other.ic == (0.1, -0.2)
    assert other.rel_tol == 1e-9
    assert other.output_rate == 500.0


# ── 정확도 ───────────────────────────────────────────────────────

def test_matches_analytic_harmonic_solution(undamped_trajectory):
    """x = sin(10t)/10, v = cos(10t) 와 1e-9 안에서 일치합니다."""
    t = undamped_trajectory.times
    np.testing.assert_allclose(undamped_trajectory.x, np.sin(10 * t) / 10, rtol=0, atol=1e-9)
    np.testing.assert_allclose(undamped_trajectory.v, np.cos(10 * t), rtol=0, atol=1e-8)


def test_undamped_energy_is_conserved(undamped_linear, undamped_trajectory):
    """비감쇠 선형 진동자의 역학 에너지 상대 변동이 1e-9 미만입니다."""
    energy = mechanical_energy(undamped_linear, undamped_trajectory)
    drift = np.max(np.abs(energy - energy[0])) / energy[0]
    assert drift < 1e-9


def test_acceleration_channel_satisfies_equation(short_duffing_trajectory, duffing_model):
    """a 채널은 m a + B + K = f_ext 를 만족합니다."""
    traj = short_duffing_trajectory
    lhs = duffing_model.mass * traj.a + duffing_model.damping_force(traj.x, traj.v) + duffing_model.stiffness_force(traj.x)
    np.testing.assert_allclose(lhs, traj.f_ext, atol=1e-12)


def test_trajectory_starts_at_initial_condition(short_duffing_trajectory):
    assert short_duffing_trajectory.x[0] == 0.0
    assert short_duffing_trajectory.v[0] == 1.0
    assert short_duffing_trajectory.t0 == 0.0
    assert len(short_duffing_trajectory) == 15_001


def test_damped_response_loses_energy(short_duffing_trajectory, duffing_model):
    """감쇠 모델의 역학 에너지는 증가하지 않습니다."""
    energy = mechanical_energy(duffing_model, short_duffing_trajectory)
    assert np.all(np.diff(energy) <= 1e-8 * energy[0])
    assert energy[-1] < 0.5 * energy[0]


def test_simulation_is_deterministic(duffing_model):
    cfg = SimConfig(t_span=(0.0, 0.2), ic=(0.0, 1.0), output_rate=2_000.0)
    a = simulate(duffing_model, cfg)
    b = simulate(duffing_model, cfg)
    np.testing.assert_array_equal(a.x, b.x)
    np.testing.assert_array_equal(a.v, b.v)


# ── 외력 ─────────────────────────────────────────────────────────

def test_impulse_force_shape():
    """반정현 충격은 t_center 에서 최대, 구간 밖에서 0 이고 충격량은 A·w·2/π 입니다."""
    pulse = ImpulseForce(amplitude=35.0, t_center=0.5, width=0.002)
    assert pulse(0.5) == pytest.approx(35.0)
    assert pulse(0.498) == 0.0
    assert pulse(0.6) == 0.0
    assert pulse.impulse == pytest.approx(35.0 * 0.002 * 2 / math.pi)


def test_sampled_impulse_grid_contains_center():
    sig = impulse_force(10.0, t_center=0.05, width=0.002, fs=20_000.0)
    k = int(np.argmax(sig.values))
    assert sig.times[k] == pytest.approx(0.05, abs=1e-12)
    assert sig.values[k] == pytest.approx(10.0)


def test_impulse_on_free_mass_sets_momentum():
    """자유 질량의 속도 변화는 충격량 / m 입니다."""
    pulse = ImpulseForce(amplitude=10.0, t_center=0.05, width=0.002)
    spec = ModelSpec(0.5)
    cfg = SimConfig(t_span=(0.0, 0.1), ic=(0.0, 0.0), output_rate=20_000.0, forcing=pulse)
    traj = simulate(spec, cfg)
    assert traj.v[-1] == pytest.approx(pulse.impulse / spec.mass, rel=1e-8)
    assert traj.is_forced
    assert traj.f_ext.max() == pytest.approx(10.0, rel=1e-6)


def test_sampled_forcing_on_free_mass():
    """샘플 외력(선형 보간)도 같은 충격량을 전달합니다."""
    sig = impulse_force(10.0, t_center=0.05, width=0.002, fs=20_000.0)
    spec = ModelSpec(0.5)
    cfg = SimConfig(t_span=(0.0, 0.1), ic=(0.0, 0.0), output_rate=20_000.0, forcing=sig)
    traj = simulate(spec, cfg)
    expected = ImpulseForce(10.0, 0.05, 0.002).impulse / spec.mass
    assert traj.v[-1] == pytest.approx(expected, rel=2e-3)


# ── 수치 실패 ────────────────────────────────────────────────────

def test_step_size_underflow_raised():
    """최소 스텝이 최대 스텝보다 크면 첫 스텝에서 StepSizeUnderflow 입니다."""
    spec = ModelSpec(1.0, (), ((disp_power(1), 100.0),))
    cfg = SimConfig(t_span=(0.0, 1.0), ic=(0.0, 1.0), output_rate=20_000.0, dt_min=1e-3)
    with pytest.raises(StepSizeUnderflow):
        simulate(spec, cfg)


def test_finite_time_blow_up_is_numerical_error():
    """유한 시간에 발산하는 모델은 수치 오류(StepSizeUnderflow 또는 NonFiniteState)로 끝납니다."""
    spec = ModelSpec(1.0, (), ((disp_power(3), -1e6),))
    cfg = SimConfig(t_span=(0.0, 1.0), ic=(0.0, 10.0), rel_tol=1e-8, abs_tol=1e-12, output_rate=1_000.0)
    with pytest.raises(NumericalError):
        simulate(spec, cfg)
