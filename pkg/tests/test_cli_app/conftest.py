"""cli_app 테스트 공용 fixture: 작은 선형 진동자 실행 설정."""

import textwrap

import pytest

LINEAR_CONFIG = textwrap.dedent(
    """
    schema_version = 1

    [model]
    mass = 1.0

    [[model.damping]]
    kind = "vel_power"
    power = 1
    coefficient = 0.5

    [[model.stiffness]]
    kind = "disp_power"
    power = 1
    coefficient = 100.0

    [sim]
    t_span = [0.0, 3.0]
    ic = [0.0, 1.0]
    rel_tol = 1e-10
    abs_tol = 1e-14
    output_rate = 5000.0

    [library]
    damping = [{ kind = "vel_power", power = 1 }, { kind = "vel_power", power = 3 }]
    stiffness = [{ kind = "disp_power", power = 1 }, { kind = "disp_power", power = 3 }]

    [method]
    method = "both"

    [validation]
    ics = [[0.0, 0.5], [0.0, 2.0]]

    [output]
    plots = false
    """
)


@pytest.fixture
def linear_config(tmp_path):
    path = tmp_path / "linear.toml"
    path.write_text(LINEAR_CONFIG, encoding="utf-8")
    return path
