"""
전체 테스트 공용 설정과 fixture.

기준 궤적(10초, 20 kHz)은 시뮬레이션 비용이 커서 session 범위로 한 번만 만듭니다.
이 fixture 를 쓰는 테스트에는 @pytest.mark.slow 를 붙입니다.
"""

import os
import tempfile
from pathlib import Path

import pytest

# 로거가 import 될 때 작업 디렉터리에 logs/ 를 만들지 않도록 먼저 지정합니다.
os.environ.setdefault("EDDIKIT_LOG_DIR", str(Path(tempfile.gettempdir()) / "eddikit-test-logs"))

from core.models import (  # noqa: E402
    ModelSpec,
    Trajectory,
    disp_power,
    duffing_clearance_damping_library,
    duffing_clearance_model,
    duffing_clearance_stiffness_library,
    vel_power,
)
from core.pipeline import EddiResult, run_eddi  # noqa: E402
from core.simulator import SimConfig, simulate  # noqa: E402
from storage.trajectories import write_trajectory  # noqa: E402


# ── 모델 ──────────────────────────────────────────────────────────


@pytest.fixture(scope="session")
def duffing_model() -> ModelSpec:
    """간극 Duffing 기준 모델 (m=0.1, e=5 mm)."""
    return duffing_clearance_model()


@pytest.fixture(scope="session")
def linear_model() -> ModelSpec:
    """m=1, b=0.5, k=100 선형 감쇠 진동자 (ω=10 rad/s)."""
    return ModelSpec(1.0, ((vel_power(1), 0.5),), ((disp_power(1), 100.0),))


# ── 궤적 ──────────────────────────────────────────────────────────


@pytest.fixture(scope="session")
def duffing_trajectory(duffing_model) -> Trajectory:
    """ic=(0, 1), 10초, 20 kHz 기준 궤적. 느립니다."""
    cfg = SimConfig(t_span=(0.0, 10.0), ic=(0.0, 1.0), rel_tol=1e-12, abs_tol=1e-16, output_rate=20_000.0)
    return simulate(duffing_model, cfg)


@pytest.fixture(scope="session")
def duffing_eddi(duffing_trajectory) -> EddiResult:
    return run_eddi(
        duffing_trajectory,
        duffing_clearance_damping_library(),
        duffing_clearance_stiffness_library(),
    )


@pytest.fixture(scope="session")
def short_duffing_trajectory(duffing_model) -> Trajectory:
    """3초, 5 kHz 의 가벼운 간극 Duffing 궤적."""
    cfg = SimConfig(t_span=(0.0, 3.0), ic=(0.0, 1.0), rel_tol=1e-10, abs_tol=1e-14, output_rate=5_000.0)
    return simulate(duffing_model, cfg)


@pytest.fixture(scope="session")
def linear_trajectory(linear_model) -> Trajectory:
    """선형 감쇠 진동자 3초, 5 kHz."""
    cfg = SimConfig(t_span=(0.0, 3.0), ic=(0.0, 1.0), rel_tol=1e-10, abs_tol=1e-14, output_rate=5_000.0)
    return simulate(linear_model, cfg)


@pytest.fixture(scope="session")
def duffing_trajectory_csv(tmp_path_factory, duffing_trajectory) -> Path:
    path = tmp_path_factory.mktemp("reference") / "trajectory.csv"
    return write_trajectory(duffing_trajectory, path)
