"""Multiscale sliced Wasserstein distance between sample sets.

Patches are drawn from every Laplacian-pyramid level, standardized and
flattened; the distance per level is the mean exact 1D Wasserstein distance
over random unit projections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from exceptions import ContractError, DataError
from geovalid.pyramid import laplacian_pyramid
from schemas.config import SwdSettings
from schemas.metrics import DistanceMatrix, PatchSet
from utils.logger import get_logger

logger = get_logger(__name__)

SeedLike = Union[int, Sequence[int]]

# Patches whose per-channel std is below this are treated as constant.
CONSTANT_STD = 1e-12


@dataclass
class SwdResult:
    score: float
    per_level: list[float] = field(default_factory=list)
    # Pyramid index of each per_level entry; levels without patches are absent.
    levels: list[int] = field(default_factory=list)
    patch_counts: list[int] = field(default_factory=list)


def extract_patches(
    volumes: np.ndarray,
    level: int,
    patch_shape: Sequence[int],
    n_patches: int,
    seed: SeedLike,
    standardize: str = "patch",
) -> PatchSet:
    """Draw patches at uniformly random corners of a volume set.

    Args:
        volumes: Array [N, C, X, Y, Z] of one pyramid level
        level: Pyramid level index recorded in the result
        patch_shape: Patch extents (px, py, pz)
        n_patches: Number of corners drawn
        seed: Seed of the corner draw
        standardize: ``patch`` standardizes every patch per channel and drops
            patches with a constant channel; ``set`` standardizes each channel
            over the whole set

    Returns:
        PatchSet with rows of length C * px * py * pz

    Raises:
        ContractError: Patch larger than the level
    """
    volumes = np.asarray(volumes, dtype=np.float64)
    if volumes.ndim == 4:
        volumes = volumes[np.newaxis]
    n, c = volumes.shape[:2]
    px, py, pz = (int(p) for p in patch_shape)
    X, Y, Z = volumes.shape[2:]
    if px > X or py > Y or pz > Z:
        raise ContractError(f"patch {(px, py, pz)} larger than level extent {(X, Y, Z)}")
    if n_patches == 0:
        return PatchSet(np.zeros((0, c * px * py * pz)), (px, py, pz), c, level)

    rng = np.random.default_rng(seed)
    items = rng.integers(0, n, size=n_patches)
    xs = rng.integers(0, X - px + 1, size=n_patches)
    ys = rng.integers(0, Y - py + 1, size=n_patches)
    zs = rng.integers(0, Z - pz + 1, size=n_patches)
    patches = np.stack(
        [volumes[i, :, x : x + px, y : y + py, z : z + pz] for i, x, y, z in zip(items, xs, ys, zs)]
    )

    if standardize == "set":
        mean = patches.mean(axis=(0, 2, 3, 4), keepdims=True)
        std = patches.std(axis=(0, 2, 3, 4), keepdims=True)
        patches = (patches - mean) / np.where(std > CONSTANT_STD, std, 1.0)
    else:
        mean = patches.mean(axis=(2, 3, 4), keepdims=True)
        std = patches.std(axis=(2, 3, 4), keepdims=True)
        keep = np.all(std[:, :, 0, 0, 0] > CONSTANT_STD, axis=1)
        patches = (patches[keep] - mean[keep]) / std[keep]

    return PatchSet(patches.reshape(patches.shape[0], -1), (px, py, pz), c, level)


def wasserstein_1d(a: np.ndarray, b: np.ndarray) -> float:
    """Exact 1-Wasserstein distance between equal-size empirical measures."""
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.shape != b.shape:
        raise ContractError(f"1D Wasserstein needs equal sizes, got {a.size} and {b.size}")
    if a.size == 0:
        return 0.0
    return float(np.mean(np.abs(a - b)))


def random_directions(dimension: int, n_projections: int, seed: SeedLike) -> np.ndarray:
    """Unit directions uniform on the sphere, shape [dimension, n_projections]."""
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((dimension, n_projections))
    return directions / np.linalg.norm(directions, axis=0, keepdims=True)


def sliced_wasserstein(
    a: Union[PatchSet, np.ndarray],
    b: Union[PatchSet, np.ndarray],
    n_projections: int = 128,
    seed: SeedLike = 0,
) -> float:
    """Average 1D Wasserstein distance over random projections.

    The larger set is subsampled (seeded) to the size of the smaller one.

    Raises:
        ContractError: Patch dimensions differ
    """
    pa = a.patches if isinstance(a, PatchSet) else np.asarray(a, dtype=np.float64)
    pb = b.patches if isinstance(b, PatchSet) else np.asarray(b, dtype=np.float64)
    if pa.shape[1] != pb.shape[1]:
        raise ContractError(f"patch dimensions differ: {pa.shape[1]} vs {pb.shape[1]}")
    directions = random_directions(pa.shape[1], n_projections, seed)
    count = min(len(pa), len(pb))
    if count == 0:
        return 0.0
    subsample_seed = [int(s) for s in np.atleast_1d(seed)] + [1]
    sub = np.random.default_rng(subsample_seed)
    if len(pa) > count:
        pa = pa[np.sort(sub.choice(len(pa), size=count, replace=False))]
    if len(pb) > count:
        pb = pb[np.sort(sub.choice(len(pb), size=count, replace=False))]
    proj_a = np.sort(pa @ directions, axis=0)
    proj_b = np.sort(pb @ directions, axis=0)
    return float(np.mean(np.abs(proj_a - proj_b)))


def _select_channels(samples: np.ndarray, channels: Optional[list[int]]) -> np.ndarray:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 4:
        samples = samples[np.newaxis]
    if channels is None:
        return samples
    return samples[:, channels]


def swd_score(
    samples_a: np.ndarray,
    samples_b: np.ndarray,
    settings: Optional[SwdSettings] = None,
) -> SwdResult:
    """Mean sliced Wasserstein distance across pyramid levels.

    Both sets use the same corner seed and the same projections at each
    level, so identical sets score exactly 0.

    Args:
        samples_a: Array [N, C, X, Y, Z]
        samples_b: Array [M, C, X, Y, Z]
        settings: Patch, projection and pyramid settings

    Returns:
        SwdResult with the mean score and the breakdown over scored levels

    Raises:
        ContractError: Sample shapes differ
        DataError: No level yields patches in both sets
    """
    settings = settings or SwdSettings()
    a = _select_channels(samples_a, settings.channels)
    b = _select_channels(samples_b, settings.channels)
    if a.shape[1:] != b.shape[1:]:
        raise ContractError(f"sample shapes differ: {a.shape[1:]} vs {b.shape[1:]}")

    pyramid_a = laplacian_pyramid(a, settings.max_levels, settings.patch_shape)
    pyramid_b = laplacian_pyramid(b, settings.max_levels, settings.patch_shape)
    per_level: list[float] = []
    levels: list[int] = []
    counts: list[int] = []
    for level, (level_a, level_b) in enumerate(zip(pyramid_a, pyramid_b)):
        patch_seed = [settings.seed, level, 0]
        set_a = extract_patches(
            level_a, level, settings.patch_shape, settings.n_patches, patch_seed, settings.standardize
        )
        set_b = extract_patches(
            level_b, level, settings.patch_shape, settings.n_patches, patch_seed, settings.standardize
        )
        counts.append(min(len(set_a), len(set_b)))
        if counts[-1] == 0:
            logger.debug("swd_level_skipped", level=level, patches_a=len(set_a), patches_b=len(set_b))
            continue
        levels.append(level)
        per_level.append(
            sliced_wasserstein(set_a, set_b, settings.n_projections, [settings.seed, level, 1])
        )
    if not per_level:
        raise DataError("no pyramid level produced non-constant patches in both sets")
    return SwdResult(float(np.mean(per_level)), per_level, levels, counts)


def nearest_training_sample(
    query: np.ndarray,
    training_samples: Sequence[np.ndarray],
    settings: Optional[SwdSettings] = None,
) -> tuple[int, float]:
    """Training sample closest to ``query`` in sliced Wasserstein distance.

    All comparisons share one seed. Ties go to the lowest index.

    Raises:
        DataError: Empty training set
    """
    if len(training_samples) == 0:
        raise DataError("nearest-sample search needs a non-empty training set")
    best_index, best_distance = -1, np.inf
    for index, candidate in enumerate(training_samples):
        distance = swd_score(query, candidate, settings).score
        if distance < best_distance:
            best_index, best_distance = index, distance
    return best_index, float(best_distance)


def pair_seed(seed: int, i: int, j: int) -> int:
    """Deterministic per-pair seed derived from (seed, i, j)."""
    return int(np.random.SeedSequence([seed, i, j]).generate_state(1)[0])


def pairwise_swd(
    samples: Sequence[np.ndarray],
    settings: Optional[SwdSettings] = None,
) -> DistanceMatrix:
    """Symmetric matrix of sliced Wasserstein distances between single samples."""
    settings = settings or SwdSettings()
    n = len(samples)
    pairs = {}
    for i in range(n):
        for j in range(i + 1, n):
            pair_settings = settings.model_copy(update={"seed": pair_seed(settings.seed, i, j)})
            pairs[(i, j)] = swd_score(samples[i], samples[j], pair_settings).score
    return DistanceMatrix.from_upper(n, pairs)
