"""Law-of-superposition check on deposition-time volumes."""

from __future__ import annotations

import numpy as np

from exceptions import DataError


def superposition_fraction(time_volume: np.ndarray) -> float:
    """Fraction of vertically adjacent cell pairs where the upper cell is not older.

    Only comparisons are used, so any strictly increasing rescaling of time
    (raw years or [-1, 1]) gives the same value. Ties count as honoring.

    Args:
        time_volume: Array [X, Y, Z], z index 0 at the stratigraphic bottom

    Returns:
        Fraction in [0, 1]

    Raises:
        DataError: Fewer than 2 layers

    Example:
        >>> superposition_fraction(np.zeros((4, 4, 3)))
        1.0
    """
    t = np.asarray(time_volume)
    if t.ndim != 3:
        raise DataError(f"expected a [X, Y, Z] time volume, got shape {t.shape}")
    if t.shape[2] < 2:
        raise DataError("superposition needs at least 2 layers")
    honoring = np.count_nonzero(t[:, :, 1:] >= t[:, :, :-1])
    return honoring / (t.shape[0] * t.shape[1] * (t.shape[2] - 1))


def superposition_fractions(samples: np.ndarray, time_channel: int) -> np.ndarray:
    """Per-sample fractions of a batch [N, C, X, Y, Z]."""
    return np.array([superposition_fraction(sample[time_channel]) for sample in samples])
