"""
test_core/ 전용 fixture.

궤적 fixture 는 tests/conftest.py 에 있습니다.
"""

import numpy as np
import pytest

from core.models import duffing_clearance_damping_library, duffing_clearance_stiffness_library


@pytest.fixture
def damping_library():
    return duffing_clearance_damping_library()


@pytest.fixture
def stiffness_library():
    return duffing_clearance_stiffness_library()


@pytest.fixture
def state_grid():
    """간극(5 mm) 양쪽을 모두 지나는 (x, v) 격자."""
    x = np.linspace(-0.03, 0.03, 61)
    v = np.linspace(-1.0, 1.0, 61)
    return np.meshgrid(x, v)
