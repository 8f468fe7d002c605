"""Realization-to-sample pipeline: vertical window, fill, crop, scale.

Every step is a pure function of its inputs (and an explicit RNG for random
crops), so the composition is deterministic given (realization, offsets).
"""

from typing import Optional, Sequence

import numpy as np

from exceptions import ConfigurationError, DataError
from geovalid.facies import folk_facies
from schemas.config import DataConfig
from schemas.volume import COARSE, FACIES, TIME, Sample, SplitPlan, VoxelVolume
from utils.logger import get_logger

logger = get_logger(__name__)

Triple = tuple[int, int, int]


def crop_vertical(volume: VoxelVolume, z_min_m: float = 4.0, z_max_m: float = 14.0) -> VoxelVolume:
    """Keep the layers whose base elevation lies in [z_min_m, z_max_m).

    Elevations are measured from the grid base.

    Raises:
        ConfigurationError: Window bounds not ordered or not multiples of dz
        DataError: Window outside the grid
    """
    dz = volume.cell_size[2]
    if not z_min_m < z_max_m:
        raise ConfigurationError(f"empty vertical window [{z_min_m}, {z_max_m})")
    low, high = z_min_m / dz, z_max_m / dz
    if not (np.isclose(low, round(low)) and np.isclose(high, round(high))):
        raise ConfigurationError(f"window [{z_min_m}, {z_max_m}) is not a multiple of dz={dz}")
    low, high = int(round(low)), int(round(high))
    if low < 0 or high > volume.dims[2]:
        raise DataError(f"window layers {low}..{high} outside a grid of {volume.dims[2]} layers")
    channels = {name: values[:, :, low:high].copy() for name, values in volume.channels.items()}
    x0, y0, z0 = volume.origin
    return volume.with_channels(channels, origin=(x0, y0, z0 + low))


def fill_above_topography(volume: VoxelVolume) -> VoxelVolume:
    """Fill empty top-of-column cells.

    Time gets one constant per column (time of the highest deposited cell plus
    one year); every other channel gets 0. Non-empty cells are untouched.

    Raises:
        DataError: A column has no deposited cell
    """
    empty = volume.empty_mask()
    if not empty.any():
        return volume
    n_filled = (~empty).sum(axis=2)
    if np.any(n_filled == 0):
        raise DataError("fully empty column cannot be filled")

    channels = {}
    for name, values in volume.channels.items():
        if name == TIME:
            top = np.take_along_axis(values, (n_filled - 1)[:, :, np.newaxis], axis=2)
            channels[name] = np.where(empty, top + 1.0, values)
        else:
            channels[name] = np.where(empty, 0.0, values)
    logger.debug("topography_filled", realization_id=volume.realization_id, cells=int(empty.sum()))
    return volume.with_channels(channels)


def add_facies_channel(
    volume: VoxelVolume,
    d_coarse_mm: float = 0.5,
    d_fine_mm: float = 0.01,
    mixing: str = "linear",
) -> VoxelVolume:
    """Attach Folk facies codes (as floats) computed from the coarse fraction."""
    coarse = volume.coarse_fraction
    if coarse is None:
        raise DataError("facies need a coarse_fraction channel")
    result = folk_facies(coarse, d_coarse_mm, d_fine_mm, mixing)
    return volume.with_channels({**volume.channels, FACIES: result.codes.astype(np.float64)})


def prepare_volume(volume: VoxelVolume, config: DataConfig) -> VoxelVolume:
    """Vertical window, topography fill and optional facies classification."""
    if config.z_window_m is not None:
        volume = crop_vertical(volume, *config.z_window_m)
    volume = fill_above_topography(volume)
    if FACIES in config.channels and FACIES not in volume.channels:
        volume = add_facies_channel(volume, config.d_coarse_mm, config.d_fine_mm, config.grain_mixing)
    return volume


def _check_fits(dims: Sequence[int], size: Sequence[int]) -> None:
    if any(s > d for s, d in zip(size, dims)):
        raise ConfigurationError(f"sample size {tuple(size)} larger than volume {tuple(dims)}")


def _crop_at(volume: VoxelVolume, offset: Sequence[int], size: Sequence[int]) -> VoxelVolume:
    x, y, z = (int(o) for o in offset)
    sx, sy, sz = size
    channels = {
        name: values[x : x + sx, y : y + sy, z : z + sz].copy() for name, values in volume.channels.items()
    }
    ox, oy, oz = volume.origin
    return volume.with_channels(channels, origin=(ox + x, oy + y, oz + z))


def _contains_channel(volume: VoxelVolume, threshold: float) -> bool:
    coarse = volume.coarse_fraction
    return coarse is not None and float(np.nanmax(coarse)) >= threshold


def crop_sample(
    volume: VoxelVolume,
    size: Triple = (128, 128, 16),
    rng: Optional[np.random.Generator] = None,
    offset: Optional[Sequence[int]] = None,
    must_contain_channel: bool = False,
    threshold: float = 0.5,
    max_retries: int = 100,
) -> VoxelVolume:
    """Axis-aligned crop at fixed offsets or uniformly random ones.

    Args:
        volume: Source volume
        size: Crop extents
        rng: Generator for random offsets (random mode)
        offset: Fixed offsets (fixed mode); takes precedence over ``rng``
        must_contain_channel: Reject crops whose max coarse fraction is below ``threshold``
        threshold: Coarse-fraction threshold of the channel constraint
        max_retries: Random draws allowed before giving up

    Returns:
        Cropped volume; ``origin`` records the absolute offsets

    Raises:
        ConfigurationError: Size larger than the volume
        DataError: Constraint not met (fixed mode) or retry cap exceeded
    """
    dims = volume.dims
    _check_fits(dims, size)
    if offset is not None or rng is None:
        crop = _crop_at(volume, offset if offset is not None else (0, 0, 0), size)
        if must_contain_channel and not _contains_channel(crop, threshold):
            raise DataError(f"fixed crop at {tuple(offset or (0, 0, 0))} holds no channel belt")
        return crop

    for _ in range(max_retries):
        drawn = [int(rng.integers(0, d - s + 1)) for d, s in zip(dims, size)]
        crop = _crop_at(volume, drawn, size)
        if not must_contain_channel or _contains_channel(crop, threshold):
            return crop
    raise DataError(
        f"no crop of realization {volume.realization_id} reached coarse fraction "
        f"{threshold} after {max_retries} draws"
    )


def extremity_offsets(dims: Sequence[int], size: Sequence[int], z_offset: int = 0) -> list[Triple]:
    """Offsets at the minimal and maximal y position, x centered, z at ``z_offset``."""
    _check_fits(dims, size)
    x = (dims[0] - size[0]) // 2
    return [(x, 0, z_offset), (x, dims[1] - size[1], z_offset)]


def scale_sample(
    volume: VoxelVolume,
    channels: Sequence[str] = (COARSE, TIME),
    time_range: Optional[tuple[float, float]] = None,
) -> Sample:
    """Scale selected channels to [-1, 1].

    Coarse fraction maps f -> 2f - 1, facies codes c -> c - 1, time maps its
    (t_min, t_max) range affinely; the range is taken from the volume unless
    ``time_range`` is given, and it is stored on the sample for unscaling.

    Raises:
        DataError: Missing channel, empty cell, or degenerate time range
    """
    if volume.has_empty_cells():
        raise DataError("sample still holds empty cells; fill before scaling")
    stacked = []
    used_range = None
    for name in channels:
        if name not in volume.channels:
            raise DataError(f"volume has no channel '{name}'")
        values = volume.channels[name]
        if name == TIME:
            t_min, t_max = time_range or (float(values.min()), float(values.max()))
            if not t_max > t_min:
                raise DataError(f"degenerate time range [{t_min}, {t_max}]")
            used_range = (t_min, t_max)
            stacked.append(2.0 * (values - t_min) / (t_max - t_min) - 1.0)
        elif name == FACIES:
            stacked.append(values - 1.0)
        else:
            stacked.append(2.0 * values - 1.0)
    return Sample(
        data=np.stack(stacked),
        channels=tuple(channels),
        realization_id=volume.realization_id,
        offset=volume.origin,
        time_range=used_range,
        cell_size=volume.cell_size,
    )


def unscale_sample(sample: Sample) -> VoxelVolume:
    """Invert :func:`scale_sample`.

    Without a stored time range (generated samples) time is returned as
    relative age in [0, 1]. Facies are rounded back to codes 0..2.
    """
    channels = {}
    for index, name in enumerate(sample.channels):
        values = np.asarray(sample.data[index], dtype=np.float64)
        if name == TIME:
            relative = (values + 1.0) / 2.0
            if sample.time_range is None:
                channels[name] = relative
            else:
                t_min, t_max = sample.time_range
                channels[name] = t_min + relative * (t_max - t_min)
        elif name == FACIES:
            channels[name] = np.clip(np.rint(values) + 1.0, 0.0, 2.0)
        else:
            channels[name] = np.clip((values + 1.0) / 2.0, 0.0, 1.0)
    return VoxelVolume(
        channels=channels,
        cell_size=sample.cell_size,
        realization_id=sample.realization_id,
        origin=sample.offset,
        time_range=sample.time_range,
    )


def make_split(
    n_total: int,
    n_train: int,
    n_val: int,
    n_test: int,
    mode: str = "fixed-tail",
    seed: int = 0,
) -> SplitPlan:
    """Assign 1-based realization ids to training, validation and test.

    Both modes keep the test ids as the tail block of the declared range;
    ``random`` shuffles the remaining ids between training and validation.

    Raises:
        ConfigurationError: Counts exceed the total

    Example:
        >>> plan = make_split(20200, 19000, 1000, 200)
        >>> plan.val_ids[0], plan.test_ids[-1]
        (19001, 20200)
    """
    used = n_train + n_val + n_test
    if used > n_total:
        raise ConfigurationError(f"split needs {used} realizations, only {n_total} available")
    head = np.arange(1, n_train + n_val + 1)
    test = list(range(n_train + n_val + 1, used + 1))
    if mode == "random":
        head = np.random.default_rng(seed).permutation(head)
    elif mode != "fixed-tail":
        raise ConfigurationError(f"unknown split mode: {mode}")
    plan = SplitPlan(
        train_ids=sorted(int(i) for i in head[:n_train]),
        val_ids=sorted(int(i) for i in head[n_train:]),
        test_ids=test,
        mode=mode,  # type: ignore[arg-type]
        n_total=n_total,
    )
    plan.validate()
    return plan
