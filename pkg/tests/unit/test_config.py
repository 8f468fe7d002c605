"""Unit tests for settings and run configuration models."""

import pytest
from pydantic import ValidationError

from config import Settings
from exceptions import ConfigurationError
from schemas.config import (
    ArchitectureConfig,
    DataConfig,
    ResolvedRunConfig,
    RunConfig,
    SplitConfig,
    SynthParams,
)
from tests.conftest import tiny_run_document


class TestSettings:
    """Test environment-driven settings."""

    def test_defaults(self, monkeypatch):
        """Test default values without environment overrides."""
        for name in ("FLUVGAN_PRECISION", "FLUVGAN_THREADS", "FLUVGAN_RUNS_DIR"):
            monkeypatch.delenv(name, raising=False)

        settings = Settings()

        assert settings.precision == "float64"
        assert settings.threads == 1
        assert settings.runs_dir == "runs"

    def test_prefixed_environment(self, monkeypatch):
        """Test FLUVGAN_ variables override defaults."""
        monkeypatch.setenv("FLUVGAN_PRECISION", "float32")
        monkeypatch.setenv("FLUVGAN_ENVIRONMENT", "production")

        settings = Settings()

        assert settings.precision == "float32"
        assert settings.is_production
        assert not settings.is_development

    def test_invalid_precision(self, monkeypatch):
        """Test unsupported precisions are refused."""
        monkeypatch.setenv("FLUVGAN_PRECISION", "float16")

        with pytest.raises(ValidationError):
            Settings()


class TestRunConfig:
    """Test preset resolution and override rules."""

    def test_resolve_derives_shapes_from_data(self):
        """Test output channels and target shape follow the data section."""
        resolved = RunConfig.model_validate(tiny_run_document()).resolve()

        assert resolved.architecture.target_shape == (8, 8, 4)
        assert resolved.architecture.channels_out == 2
        assert resolved.architecture.r1
        assert resolved.train.r1_enabled
        assert resolved.train.batch_size == 2

    def test_seed_override(self):
        """Test the top-level seed becomes the training seed."""
        document = tiny_run_document()
        document["seed"] = 11

        assert RunConfig.model_validate(document).resolve().train.seed == 11

    def test_conflicting_architecture_shape(self):
        """Test an explicit target shape must match the data."""
        document = tiny_run_document()
        document["architecture"]["target_shape"] = [16, 16, 4]

        with pytest.raises(ConfigurationError):
            RunConfig.model_validate(document).resolve()

    def test_matching_architecture_shape_is_accepted(self):
        """Test a redundant but consistent override passes."""
        document = tiny_run_document()
        document["architecture"]["target_shape"] = [8, 8, 4]

        assert RunConfig.model_validate(document).resolve().architecture.target_shape == (8, 8, 4)

    def test_unknown_key_rejected(self):
        """Test typos are reported instead of ignored."""
        document = tiny_run_document()
        document["data"]["n_volume"] = 3

        with pytest.raises(ValidationError):
            RunConfig.model_validate(document)

    def test_unknown_preset(self):
        """Test unknown presets surface at resolution."""
        with pytest.raises(ConfigurationError):
            RunConfig(preset="arch42").resolve()

    def test_resolved_config_reloads_unchanged(self):
        """Test an echoed config.json loads back into the same run."""
        resolved = RunConfig.model_validate(tiny_run_document(out="runs/x")).resolve()

        reloaded = RunConfig.model_validate(resolved.model_dump(mode="json")).resolve()

        assert reloaded == resolved
        assert isinstance(reloaded, ResolvedRunConfig)


class TestSectionValidation:
    """Test field-level validation of the sections."""

    def test_odd_kernel_base(self):
        """Test kernel_base must be even."""
        with pytest.raises(ValidationError):
            ArchitectureConfig(kernel_base=3)

    def test_synth_layers_fit_grid(self):
        """Test the layer count cannot exceed nz."""
        with pytest.raises(ValidationError):
            SynthParams(dims=(8, 8, 4), n_layers=5)

    def test_flvd_needs_path(self):
        """Test the file source requires a directory."""
        with pytest.raises(ValidationError):
            DataConfig(source="flvd")

    def test_grain_sizes_ordered(self):
        """Test the fine end-member must be finer."""
        with pytest.raises(ValidationError):
            DataConfig(d_coarse_mm=0.01, d_fine_mm=0.5)

    def test_duplicate_channels(self):
        """Test channels are unique."""
        with pytest.raises(ValidationError):
            DataConfig(channels=["coarse_fraction", "coarse_fraction"])

    def test_split_mode(self):
        """Test split modes are restricted."""
        with pytest.raises(ValidationError):
            SplitConfig(mode="stratified")

    def test_batch_of_one_rejected(self):
        """Test batch norm needs at least two items per batch."""
        document = tiny_run_document()
        document["train"]["batch_size"] = 1

        with pytest.raises(ValidationError):
            RunConfig.model_validate(document).resolve()
