"""Validation-point records and metric containers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from exceptions import ContractError

METRICS_COLUMNS = ("iteration", "g_loss", "d_loss", "d_w", "f_s", "wall_time_s")


@dataclass(frozen=True)
class MetricsRecord:
    """Scalars logged at one validation point of a run.

    ``f_s`` is None when no deposition-time channel is generated.
    """

    iteration: int
    g_loss: float
    d_loss: float
    d_w: float
    f_s: Optional[float]
    wall_time_s: float

    def is_finite(self) -> bool:
        values = [self.g_loss, self.d_loss, self.d_w, self.wall_time_s]
        if self.f_s is not None:
            values.append(self.f_s)
        return all(math.isfinite(v) for v in values)

    def as_row(self) -> dict[str, Any]:
        """CSV row with shortest round-trip float formatting and empty f_s if absent."""
        return {
            "iteration": str(self.iteration),
            "g_loss": repr(float(self.g_loss)),
            "d_loss": repr(float(self.d_loss)),
            "d_w": repr(float(self.d_w)),
            "f_s": "" if self.f_s is None else repr(float(self.f_s)),
            "wall_time_s": repr(float(self.wall_time_s)),
        }

    @classmethod
    def from_row(cls, row: dict[str, str]) -> "MetricsRecord":
        return cls(
            iteration=int(row["iteration"]),
            g_loss=float(row["g_loss"]),
            d_loss=float(row["d_loss"]),
            d_w=float(row["d_w"]),
            f_s=float(row["f_s"]) if row.get("f_s") not in (None, "") else None,
            wall_time_s=float(row["wall_time_s"]),
        )


@dataclass
class PatchSet:
    """Flattened patches of one pyramid level.

    ``patches`` has shape (n, channels * px * py * pz).
    """

    patches: np.ndarray
    patch_shape: tuple[int, int, int]
    n_channels: int
    source_level: int = 0

    def __len__(self) -> int:
        return int(self.patches.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.patches.shape[1])


@dataclass
class DistanceMatrix:
    """Symmetric non-negative distances with a zero diagonal."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ContractError(f"distance matrix must be square, got {v.shape}")
        if np.any(v < 0):
            raise ContractError("distances must be non-negative")
        if not np.allclose(v, v.T, rtol=0.0, atol=1e-12):
            raise ContractError("distance matrix is not symmetric")
        if np.any(np.diag(v) != 0):
            raise ContractError("distance matrix diagonal must be zero")
        self.values = v

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @classmethod
    def from_upper(cls, n: int, pairs: dict[tuple[int, int], float]) -> "DistanceMatrix":
        values = np.zeros((n, n))
        for (i, j), d in pairs.items():
            values[i, j] = values[j, i] = d
        return cls(values)
