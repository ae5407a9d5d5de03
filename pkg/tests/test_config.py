"""Settings and pipeline config files."""

import pytest

from lamerecon.config import Settings, load_pipeline_config, read_key_values
from lamerecon.errors import ContractViolation
from lamerecon.models import BoundarySource, DesignVariant, PipelineConfig, RecoveryMode


def test_settings_defaults_and_env_override(monkeypatch):
    assert Settings().sigma_min_rel == pytest.approx(1e-3)
    monkeypatch.setenv("LAMERECON_SIGMA_MIN_REL", "0.01")
    monkeypatch.setenv("LAMERECON_FRAME_CELLS", "5")
    settings = Settings()
    assert settings.sigma_min_rel == pytest.approx(0.01)
    assert settings.frame_cells == 5


def test_settings_validation(monkeypatch):
    monkeypatch.setenv("LAMERECON_DBAR_PADDING", "0.1")
    with pytest.raises(ValueError):
        Settings()


def test_pipeline_config_file(tmp_path):
    path = tmp_path / "run.env"
    path.write_text(
        "# experiment\n"
        "DIM=2\n"
        "GRID_POINTS=33\n"
        "K=0.5\n"
        "BOUNDARY_SOURCE=family\n"
        "BOUNDARY_DIR=\n"
        "DESIGN_VARIANT=both\n"
        "DESIGN_ANCHORS=0.3,0.3;0.7,0.6\n"
        "MU_MODE=ray\n"
        "TAU_SWEEP=8,16,32,64\n"
        "SIGMA_MIN_REL=\n")
    assert read_key_values(path)["grid_points"] == "33"
    config = load_pipeline_config(path)
    assert config.grid_points == 33
    assert config.boundary_source is BoundarySource.FAMILY
    assert config.design_variant is DesignVariant.BOTH
    assert config.mu_mode is RecoveryMode.RAY
    assert config.boundary_dir is None
    assert config.sigma_min_rel is None
    assert config.anchor_points() == [(0.3, 0.3), (0.7, 0.6)]
    assert config.tau_values() == [8.0, 16.0, 32.0, 64.0]


def test_pipeline_config_rejects_unknown_and_invalid_keys(tmp_path):
    path = tmp_path / "bad.env"
    path.write_text("DIM=2\nGRID_SIZE=33\n")
    with pytest.raises(ContractViolation):
        load_pipeline_config(path)
    path.write_text("DIM=4\n")
    with pytest.raises(ContractViolation):
        load_pipeline_config(path)
    with pytest.raises(FileNotFoundError):
        load_pipeline_config(tmp_path / "missing.env")


def test_anchor_defaults_and_checks():
    assert PipelineConfig(dim=3).anchor_points() == [(0.5, 0.5, 0.5)]
    with pytest.raises(ValueError):
        PipelineConfig(design_anchors="0.5,0.5,0.5").anchor_points()


def test_example_config_loads():
    from pathlib import Path

    config = load_pipeline_config(Path(__file__).parent.parent / "configs" / "example.env")
    assert config.boundary_source is BoundarySource.DESIGNED
    assert config.design_variant is DesignVariant.BOTH
    assert config.mu_mode is RecoveryMode.LS
    assert config.boundary_dir is None and config.max_targets is None
    assert config.anchor_points() == [(0.35, 0.5), (0.65, 0.5)]
    assert config.inpaint_lambda
