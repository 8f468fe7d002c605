"""Anisotropic Laplacian pyramid over the three spatial axes."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.ndimage import convolve1d

from exceptions import ContractError

Triple = tuple[int, int, int]

BINOMIAL = np.array([1.0, 2.0, 1.0]) / 4.0


def halving_plan(spatial: Sequence[int], patch_shape: Sequence[int], max_levels: int) -> list[Triple]:
    """Per-level downsampling factors.

    An axis halves while its halved extent stays at least twice the patch
    extent on that axis (and the extent is even); a level is added only when
    at least one axis halves.

    Returns:
        One factor triple per transition, so ``len(plan) + 1`` levels

    Raises:
        ContractError: The patch does not fit the full-resolution volume
    """
    extents = [int(e) for e in spatial]
    patch = [int(p) for p in patch_shape]
    if any(p > e for p, e in zip(patch, extents)):
        raise ContractError(f"patch {tuple(patch)} does not fit volume {tuple(extents)}")
    plan: list[Triple] = []
    while len(plan) + 1 < max_levels:
        factors = tuple(
            2 if e % 2 == 0 and e // 2 >= 2 * p else 1 for e, p in zip(extents, patch)
        )
        if factors == (1, 1, 1):
            break
        plan.append(factors)  # type: ignore[arg-type]
        extents = [e // f for e, f in zip(extents, factors)]
    return plan


def _spatial_axes(array: np.ndarray) -> tuple[int, int, int]:
    return (array.ndim - 3, array.ndim - 2, array.ndim - 1)


def pyr_down(volume: np.ndarray, factors: Triple) -> np.ndarray:
    """Binomial blur then subsample on every halved axis."""
    out = volume
    for axis, factor in zip(_spatial_axes(volume), factors):
        if factor == 2:
            out = convolve1d(out, BINOMIAL, axis=axis, mode="mirror")
            out = np.take(out, np.arange(0, out.shape[axis], 2), axis=axis)
    return out


def pyr_up(volume: np.ndarray, factors: Triple) -> np.ndarray:
    """Zero insertion then binomial blur with gain 2 on every doubled axis."""
    out = volume
    for axis, factor in zip(_spatial_axes(volume), factors):
        if factor == 2:
            shape = list(out.shape)
            shape[axis] *= 2
            expanded = np.zeros(shape, dtype=out.dtype)
            index = [slice(None)] * out.ndim
            index[axis] = slice(0, None, 2)
            expanded[tuple(index)] = out
            out = convolve1d(expanded, 2.0 * BINOMIAL, axis=axis, mode="mirror")
    return out


def laplacian_pyramid(
    volume: np.ndarray,
    max_levels: int = 3,
    patch_shape: Sequence[int] = (7, 7, 3),
) -> list[np.ndarray]:
    """Detail volumes from fine to coarse, followed by the low-pass residual.

    Args:
        volume: Array [..., X, Y, Z] (typically [C, X, Y, Z] or [N, C, X, Y, Z])
        max_levels: Upper bound on the number of returned levels
        patch_shape: Patch extents steering the per-axis halving

    Returns:
        List of arrays; the last one is the residual
    """
    current = np.asarray(volume, dtype=np.float64)
    levels = []
    for factors in halving_plan(current.shape[-3:], patch_shape, max_levels):
        smaller = pyr_down(current, factors)
        levels.append(current - pyr_up(smaller, factors))
        current = smaller
    levels.append(current)
    return levels


def reconstruct_pyramid(levels: Sequence[np.ndarray]) -> np.ndarray:
    """Invert :func:`laplacian_pyramid`; factors are read from consecutive shapes."""
    current = levels[-1]
    for detail in reversed(levels[:-1]):
        factors = tuple(d // c for d, c in zip(detail.shape[-3:], current.shape[-3:]))
        current = detail + pyr_up(current, factors)  # type: ignore[arg-type]
    return current
