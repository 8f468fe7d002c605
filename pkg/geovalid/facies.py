"""Folk-style three-class lithofacies from the coarse-sediment fraction."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from exceptions import ContractError, DataError

# Sand:mud boundaries 1:9 and 1:1
CLAY_CUTOFF = 0.1
SAND_CUTOFF = 0.5


class Facies(IntEnum):
    CLAY = 0
    SANDY_CLAY = 1
    CLAYEY_SAND_SAND = 2


@dataclass
class FaciesResult:
    codes: np.ndarray
    mean_grain_size_mm: np.ndarray


def mean_grain_size(
    coarse_fraction: np.ndarray,
    d_coarse: float,
    d_fine: float,
    mixing: str = "linear",
) -> np.ndarray:
    """Mean grain diameter in mm; ``phi`` mixing averages on the log2 scale."""
    f = np.asarray(coarse_fraction, dtype=np.float64)
    if mixing == "phi":
        phi = f * -np.log2(d_coarse) + (1.0 - f) * -np.log2(d_fine)
        return np.power(2.0, -phi)
    if mixing != "linear":
        raise ContractError(f"unknown grain mixing rule: {mixing}")
    return f * d_coarse + (1.0 - f) * d_fine


def folk_facies(
    coarse_fraction: np.ndarray,
    d_coarse: float = 0.5,
    d_fine: float = 0.01,
    mixing: str = "linear",
) -> FaciesResult:
    """Classify every cell into clay, sandy clay or clayey sand & sand.

    Classes follow the coarse fraction f: f < 0.1 is clay, f < 0.5 is sandy
    clay, anything else clayey sand & sand.

    Args:
        coarse_fraction: Array of fractions in [0, 1]
        d_coarse: Coarse end-member diameter in mm
        d_fine: Fine end-member diameter in mm
        mixing: ``linear`` or ``phi``

    Returns:
        FaciesResult with int8 codes and the mean grain size

    Raises:
        DataError: Fraction outside [0, 1] or NaN
        ContractError: Diameters not ordered 0 < d_fine < d_coarse
    """
    if not 0.0 < d_fine < d_coarse:
        raise ContractError(f"need 0 < d_fine < d_coarse, got {d_fine} and {d_coarse}")
    f = np.asarray(coarse_fraction, dtype=np.float64)
    if np.any(~np.isfinite(f)) or np.any((f < 0.0) | (f > 1.0)):
        raise DataError("coarse fraction must lie in [0, 1]")
    codes = np.full(f.shape, Facies.CLAY, dtype=np.int8)
    codes[f >= CLAY_CUTOFF] = Facies.SANDY_CLAY
    codes[f >= SAND_CUTOFF] = Facies.CLAYEY_SAND_SAND
    return FaciesResult(codes, mean_grain_size(f, d_coarse, d_fine, mixing))
