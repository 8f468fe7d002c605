"""Array-holding records of the preprocessing pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np

from exceptions import DataError

COARSE = "coarse_fraction"
TIME = "deposition_time"
FACIES = "facies"
RESERVED_CHANNELS = (COARSE, TIME)


@dataclass
class VoxelVolume:
    """Stratigraphy grid with named per-cell channels.

    Each channel is a float array of shape (nx, ny, nz); z index 0 is the
    stratigraphic bottom. NaN marks an empty cell (air above topography).
    """

    channels: dict[str, np.ndarray]
    cell_size: tuple[float, float, float] = (50.0, 50.0, 0.5)
    realization_id: int = 0
    origin: tuple[int, int, int] = (0, 0, 0)
    time_range: Optional[tuple[float, float]] = None

    @property
    def dims(self) -> tuple[int, int, int]:
        first = next(iter(self.channels.values()))
        return tuple(int(d) for d in first.shape)  # type: ignore[return-value]

    @property
    def channel_names(self) -> list[str]:
        return list(self.channels)

    @property
    def coarse_fraction(self) -> Optional[np.ndarray]:
        return self.channels.get(COARSE)

    @property
    def deposition_time(self) -> Optional[np.ndarray]:
        return self.channels.get(TIME)

    def empty_mask(self) -> np.ndarray:
        mask = np.zeros(self.dims, dtype=bool)
        for values in self.channels.values():
            mask |= np.isnan(values)
        return mask

    def has_empty_cells(self) -> bool:
        return bool(self.empty_mask().any())

    def with_channels(self, channels: dict[str, np.ndarray], **changes: object) -> "VoxelVolume":
        return replace(self, channels=channels, **changes)  # type: ignore[arg-type]

    def copy(self) -> "VoxelVolume":
        return self.with_channels({k: v.copy() for k, v in self.channels.items()})

    def validate(self) -> None:
        """Check the volume invariants.

        Raises:
            DataError: Inconsistent channel shapes, coarse fraction outside [0, 1],
                or empty cells that are not a top-of-column run
        """
        if not self.channels:
            raise DataError("volume has no channels")
        dims = self.dims
        for name, values in self.channels.items():
            if values.shape != dims:
                raise DataError(f"channel '{name}' has shape {values.shape}, expected {dims}")
        coarse = self.coarse_fraction
        if coarse is not None:
            filled = coarse[~np.isnan(coarse)]
            if filled.size and (filled.min() < 0.0 or filled.max() > 1.0):
                raise DataError("coarse_fraction outside [0, 1]")
        empty = self.empty_mask()
        # Within a column, once a cell is empty every cell above must be empty.
        above_empty = np.logical_or.accumulate(empty, axis=2)
        if np.any(above_empty & ~empty):
            raise DataError("empty cells must form a contiguous top-of-column region")


@dataclass
class Sample:
    """Network-ready tensor of shape (channels, nx, ny, nz) scaled to [-1, 1]."""

    data: np.ndarray
    channels: tuple[str, ...]
    realization_id: int = 0
    offset: tuple[int, int, int] = (0, 0, 0)
    time_range: Optional[tuple[float, float]] = None
    cell_size: tuple[float, float, float] = (50.0, 50.0, 0.5)

    @property
    def spatial(self) -> tuple[int, int, int]:
        return tuple(int(d) for d in self.data.shape[1:])  # type: ignore[return-value]

    def channel(self, name: str) -> np.ndarray:
        return self.data[self.channels.index(name)]

    def validate(self) -> None:
        if self.data.ndim != 4 or self.data.shape[0] != len(self.channels):
            raise DataError(f"sample shape {self.data.shape} does not match channels {self.channels}")
        if np.any(np.abs(self.data) > 1.0 + 1e-12):
            raise DataError("sample values outside [-1, 1]")


@dataclass
class SplitPlan:
    """Realization ids (1-based) per dataset part."""

    train_ids: list[int]
    val_ids: list[int]
    test_ids: list[int]
    mode: Literal["random", "fixed-tail"] = "fixed-tail"
    n_total: int = field(default=0)

    def validate(self) -> None:
        parts = [set(self.train_ids), set(self.val_ids), set(self.test_ids)]
        if (parts[0] & parts[1]) or (parts[0] & parts[2]) or (parts[1] & parts[2]):
            raise DataError("split parts overlap")
        if any(i < 1 or i > self.n_total for part in parts for i in part):
            raise DataError("split ids outside the dataset range")
