"""Shared test fixtures for all test types."""

import json
import os
from pathlib import Path

import numpy as np
import pytest

from models.generator import Generator, build_generator
from models.presets import resolve_preset
from schemas.config import (
    ArchitectureConfig,
    DataConfig,
    LatentSpec,
    ResolvedRunConfig,
    RunConfig,
    SplitConfig,
    SwdSettings,
    SynthParams,
)
from schemas.volume import VoxelVolume

# Small enough that a full train step runs in well under a second
TINY_LATENT = LatentSpec(dim=4, spatial=(2, 2, 2))
TINY_TARGET = (8, 8, 4)
TINY_SYNTH = SynthParams(
    dims=(12, 12, 6),
    n_layers=6,
    channel_width_cells=2.0,
    meander_amplitude=2.0,
    meander_wavelength_cells=8.0,
    drift_rate=0.5,
)
TINY_SWD = SwdSettings(patch_shape=(3, 3, 2), n_patches=32, n_projections=16, max_levels=2)


def pytest_collection_modifyitems(config, items):
    """Skip tests marked slow unless FLUVGAN_RUN_SLOW=1."""
    if os.environ.get("FLUVGAN_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set FLUVGAN_RUN_SLOW=1 to run long training tests")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def tiny_architecture(preset: str = "arch4", **overrides) -> ArchitectureConfig:
    """Preset shrunk to a (2, 2, 2) latent and an (8, 8, 4) output."""
    values = {
        "latent": TINY_LATENT,
        "target_shape": TINY_TARGET,
        "base_channels": 4,
        "channels_out": 2,
    }
    values.update(overrides)
    return resolve_preset(preset, **values)


def tiny_run_document(preset: str = "arch4", out: str = None, g_iters: int = 2) -> dict:
    """RunConfig document for a toy-scale run on synthetic data."""
    document = {
        "preset": preset,
        "architecture": {"base_channels": 4, "latent": TINY_LATENT.model_dump()},
        "train": {
            "batch_size": 2,
            "total_g_iterations": g_iters,
            "validation_interval": 1,
            "validation_batch": 4,
            "checkpoint_interval": 1,
            "r1_interval": 1,
            "swd": TINY_SWD.model_dump(),
        },
        "data": {
            "source": "synth",
            "n_volumes": 8,
            "synth": TINY_SYNTH.model_dump(),
            "sample_size": list(TINY_TARGET),
        },
        "split": {"n_train": 4, "n_val": 2, "n_test": 2, "mode": "fixed-tail"},
    }
    if out is not None:
        document["out"] = out
    return json.loads(json.dumps(document))


@pytest.fixture
def tiny_arch() -> ArchitectureConfig:
    """Tiny arch4 architecture (residual, spectral, R1)."""
    return tiny_architecture()


@pytest.fixture
def tiny_data() -> DataConfig:
    """Synthetic data configuration matching the tiny architecture."""
    return DataConfig(n_volumes=8, synth=TINY_SYNTH, sample_size=TINY_TARGET)


@pytest.fixture
def tiny_split() -> SplitConfig:
    return SplitConfig(n_train=4, n_val=2, n_test=2, mode="fixed-tail")


@pytest.fixture
def tiny_swd() -> SwdSettings:
    return TINY_SWD


@pytest.fixture
def tiny_run_config(tmp_path: Path) -> RunConfig:
    """Two-iteration run writing into a temporary directory."""
    return RunConfig.model_validate(tiny_run_document(out=str(tmp_path / "run")))


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    """Tiny run configuration written as a --config document."""
    path = tmp_path / "config.json"
    path.write_text(json.dumps(tiny_run_document()), encoding="utf-8")
    return path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def layered_volume() -> VoxelVolume:
    """6x5x4 volume: coarse fraction rises with x, time rises with z."""
    nx, ny, nz = 6, 5, 4
    x = np.arange(nx, dtype=np.float64).reshape(nx, 1, 1)
    z = np.arange(nz, dtype=np.float64).reshape(1, 1, nz)
    coarse = np.broadcast_to(x / (nx - 1), (nx, ny, nz)).copy()
    time = np.broadcast_to(1000.0 + 100.0 * z, (nx, ny, nz)).copy()
    return VoxelVolume(
        channels={"coarse_fraction": coarse, "deposition_time": time},
        cell_size=(50.0, 50.0, 0.5),
        realization_id=3,
    )


@pytest.fixture
def random_batch(rng: np.random.Generator) -> np.ndarray:
    """Batch [6, 2, 8, 8, 4] uniform in [-1, 1]."""
    return rng.uniform(-1.0, 1.0, size=(6, 2) + TINY_TARGET)


@pytest.fixture
def tiny_resolved() -> ResolvedRunConfig:
    return RunConfig.model_validate(tiny_run_document()).resolve()


@pytest.fixture
def tiny_generator(tiny_resolved: ResolvedRunConfig) -> Generator:
    """Untrained generator of the tiny run, in eval mode."""
    return build_generator(tiny_resolved.architecture, seed=3).eval()
