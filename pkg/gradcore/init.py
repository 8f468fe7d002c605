"""Weight initializers. Both return fresh arrays drawn from the given generator."""

from __future__ import annotations

from typing import Sequence

import numpy as np

NORMAL_STD = 0.02


def init_normal(
    shape: Sequence[int], rng: np.random.Generator, std: float = NORMAL_STD
) -> np.ndarray:
    return rng.normal(0.0, std, size=tuple(shape))


def init_orthogonal(
    shape: Sequence[int], rng: np.random.Generator, rows_axis: int = 0, gain: float = 1.0
) -> np.ndarray:
    """Orthogonal initialization of the weight viewed as [rows, everything else].

    Wide matrices get orthonormal rows (Q Q^T = I), tall ones orthonormal
    columns (Q^T Q = I).
    """
    shape = tuple(shape)
    rows = shape[rows_axis]
    cols = int(np.prod(shape)) // rows
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    # sign fix makes the draw uniform over the orthogonal group
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    moved_shape = (rows,) + tuple(s for i, s in enumerate(shape) if i != rows_axis)
    return gain * np.moveaxis(q.reshape(moved_shape), 0, rows_axis)
