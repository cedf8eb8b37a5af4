"""
presets/__init__.py 단위 테스트.

내장 실행 설정 로딩 기능을 테스트합니다.
"""

import pytest

from core.models import experimental_mirror_model
from presets import list_presets, load_preset, load_preset_text, preset_path


# ── load_preset ──────────────────────────────────────────────────

def test_load_duffing_preset():
    """간극 Duffing 프리셋은 두 방법을 모두 돌리고 검증 초기조건이 2개입니다."""
    cfg = load_preset("duffing_clearance")
    assert cfg.methods() == ["eddi", "sindy"]
    assert cfg.validation.ics == [(0.0, 0.5), (0.0, 2.0)]


def test_load_experimental_preset():
    """실험 모사 프리셋은 충격 가진과 가속도 재구성을 씁니다."""
    cfg = load_preset("experimental_mirror")
    assert cfg.to_model_spec() == experimental_mirror_model()
    assert cfg.sim_config().forcing is not None
    assert cfg.preprocess.reconstruct is True


def test_preset_text_has_schema_version():
    assert "schema_version = 1" in load_preset_text("duffing_clearance")


def test_load_preset_not_found_raises():
    """존재하지 않는 프리셋은 FileNotFoundError를 발생시킵니다."""
    with pytest.raises(FileNotFoundError):
        preset_path("nonexistent_preset")


# ── list_presets ─────────────────────────────────────────────────

def test_list_presets_includes_both():
    assert list_presets() == ["duffing_clearance", "experimental_mirror"]
