"""Procedural fluvial stratigraphy for desk-scale datasets."""

from pathlib import Path
from typing import Optional

import numpy as np

from repositories.volume_repository import VolumeRepository
from schemas.config import SynthParams
from schemas.volume import COARSE, TIME, VoxelVolume
from utils.logger import get_logger

logger = get_logger(__name__)


def _reflect(value: float, low: float, high: float) -> float:
    """Fold a random-walk position back into [low, high]."""
    span = high - low
    if span <= 0:
        return low
    offset = (value - low) % (2.0 * span)
    return low + (offset if offset <= span else 2.0 * span - offset)


def _topography_depth(params: SynthParams, rng: np.random.Generator) -> np.ndarray:
    """Per-column count of empty top cells, a smooth wave across y."""
    nx, ny, nz = params.dims
    depth = np.full((nx, ny), nz - params.n_layers, dtype=int)
    if params.topography_relief == 0:
        return depth
    phase = rng.uniform(0.0, 2.0 * np.pi)
    wave = 0.5 + 0.5 * np.sin(2.0 * np.pi * np.arange(ny) / ny + phase)
    relief = np.rint(params.topography_relief * wave).astype(int)
    return depth + relief[np.newaxis, :]


def synth_generate(seed: int, params: Optional[SynthParams] = None, realization_id: int = 0) -> VoxelVolume:
    """Deposit a channel-belt volume layer by layer.

    Each layer has a sinusoidal channel centerline along x whose mean
    lateral position follows a reflected random walk across layers. The coarse
    fraction decays with the distance to the centerline; deposition time is
    the layer index times ``years_per_layer`` plus jitter bounded by half an
    increment, so time strictly increases upward in every column.

    Args:
        seed: Seed of the realization
        params: Generator parameters
        realization_id: Id recorded on the volume

    Returns:
        VoxelVolume with ``coarse_fraction`` and ``deposition_time`` channels

    Example:
        >>> volume = synth_generate(3)
        >>> superposition_fraction(volume.deposition_time)
        1.0
    """
    params = params or SynthParams()
    rng = np.random.default_rng(seed)
    nx, ny, nz = params.dims
    x = np.arange(nx, dtype=np.float64)[:, np.newaxis]
    y = np.arange(ny, dtype=np.float64)[np.newaxis, :]

    coarse = np.full((nx, ny, nz), np.nan)
    time = np.full((nx, ny, nz), np.nan)
    center = rng.uniform(0.25 * (ny - 1), 0.75 * (ny - 1))
    phase = rng.uniform(0.0, 2.0 * np.pi)
    for z in range(params.n_layers):
        centerline = center + params.meander_amplitude * np.sin(
            2.0 * np.pi * x / params.meander_wavelength_cells + phase
        )
        distance = np.abs(y - centerline) / params.channel_width_cells
        layer = params.coarse_in_channel * np.exp(-(distance**2) * params.coarse_falloff)
        layer = layer + params.overbank_coarse
        if params.coarse_noise > 0:
            layer = layer + rng.normal(0.0, params.coarse_noise, size=layer.shape)
        coarse[:, :, z] = np.clip(layer, 0.0, 1.0)

        jitter = rng.uniform(-params.time_jitter, params.time_jitter, size=(nx, ny))
        time[:, :, z] = (z + jitter) * params.years_per_layer

        center = _reflect(center + rng.normal(0.0, params.drift_rate), 0.0, ny - 1.0)
        phase += rng.normal(0.0, 0.2)

    depth = _topography_depth(params, rng)
    empty = np.arange(nz)[np.newaxis, np.newaxis, :] >= (nz - depth)[:, :, np.newaxis]
    coarse[empty] = np.nan
    time[empty] = np.nan

    volume = VoxelVolume(
        channels={COARSE: coarse, TIME: time},
        cell_size=params.cell_size,
        realization_id=realization_id,
    )
    volume.validate()
    return volume


class SynthService:
    """Writes synthetic realizations as an FLVD directory."""

    def __init__(self, params: Optional[SynthParams] = None) -> None:
        self.params = params or SynthParams()

    def realization(self, realization_id: int, base_seed: int = 0) -> VoxelVolume:
        """Realization ``id`` is always generated from seed ``base_seed + id``."""
        return synth_generate(base_seed + realization_id, self.params, realization_id)

    def write_dataset(self, out_dir: Path, n_volumes: int, base_seed: int = 0) -> list[Path]:
        """Generate realizations 1..n_volumes into ``out_dir``.

        Args:
            out_dir: Target directory
            n_volumes: Number of realizations
            base_seed: Seed offset

        Returns:
            Paths of the written files
        """
        repository = VolumeRepository(out_dir)
        repository.ensure_root()
        paths = [repository.save(self.realization(i, base_seed)) for i in range(1, n_volumes + 1)]
        logger.info("synth_dataset_written", out=str(out_dir), volumes=n_volumes, base_seed=base_seed)
        return paths
