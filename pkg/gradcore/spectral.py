"""Spectral normalization of weight tensors by power iteration."""

from __future__ import annotations

from typing import Optional

import numpy as np

from gradcore import functional as F
from gradcore.optim import Parameter
from gradcore.tensor import Tensor

SPECTRAL_EPSILON = 1e-12


def _normalize(vector: np.ndarray, eps: float) -> tuple[np.ndarray, float]:
    norm = float(np.linalg.norm(vector))
    return vector / max(norm, eps), norm


def power_iteration(
    matrix: np.ndarray,
    u: np.ndarray,
    n_iterations: int = 1,
    eps: float = SPECTRAL_EPSILON,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Estimate the top singular triplet of ``matrix`` starting from ``u``.

    Args:
        matrix: Array [rows, cols]
        u: Unit vector [rows]
        n_iterations: Number of (v, u) refinement rounds, at least 1 is used
        eps: Norm floor

    Returns:
        Tuple (u, v, sigma); ``u`` keeps its previous value when ``W v`` vanishes
    """
    v = np.zeros(matrix.shape[1], dtype=matrix.dtype)
    for _ in range(max(1, n_iterations)):
        v, _ = _normalize(matrix.T @ u, eps)
        candidate, norm = _normalize(matrix @ v, eps)
        if norm >= eps:
            u = candidate
    sigma = float(u @ matrix @ v)
    return u, v, sigma


def initial_u(rows: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    if rng is None:
        return np.full(rows, 1.0 / np.sqrt(rows))
    u, _ = _normalize(rng.standard_normal(rows), SPECTRAL_EPSILON)
    return u


def spectral_normalize(
    weight: Parameter,
    n_power_iterations: int = 1,
    eps: float = SPECTRAL_EPSILON,
    update: bool = True,
) -> Tensor:
    """Return ``weight / sigma`` with sigma estimated by power iteration.

    The weight is viewed as a matrix whose rows are the output channels
    (``weight.spectral_dim``). Sigma enters the graph as a constant. When
    ``update`` is false the stored ``spectral_u`` is read but not replaced.
    """
    matrix = weight.as_matrix()
    u = weight.spectral_u if weight.spectral_u is not None else initial_u(matrix.shape[0])
    if update:
        u, _, sigma = power_iteration(matrix, u, n_power_iterations, eps)
        weight.spectral_u = u
    else:
        v, _ = _normalize(matrix.T @ u, eps)
        sigma = float(u @ matrix @ v)
    sigma = max(sigma, eps)
    return F.mul(weight, 1.0 / sigma)


def estimate_sigma(values: np.ndarray, u: np.ndarray, spectral_dim: int = 0, n_iterations: int = 1) -> float:
    """Power-iteration estimate of the top singular value of a weight array."""
    moved = np.moveaxis(values, spectral_dim, 0)
    _, _, sigma = power_iteration(moved.reshape(moved.shape[0], -1), u, n_iterations)
    return sigma
