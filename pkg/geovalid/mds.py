"""Classical (Torgerson) multidimensional scaling of a distance matrix."""

from __future__ import annotations

from typing import Union

import numpy as np

from exceptions import ContractError
from schemas.metrics import DistanceMatrix


def double_center(distances: np.ndarray) -> np.ndarray:
    """Gram matrix B = -1/2 J (D*D) J with J the centering matrix."""
    n = distances.shape[0]
    centering = np.eye(n) - np.ones((n, n)) / n
    return -0.5 * centering @ (distances**2) @ centering


def classical_mds(distances: Union[DistanceMatrix, np.ndarray], k: int = 2) -> np.ndarray:
    """Embed items in k dimensions from their pairwise distances.

    Negative eigenvalues (non-Euclidean inputs) are clamped to zero. Each
    axis is signed so that its largest-magnitude coordinate is positive.

    Args:
        distances: Symmetric n x n distance matrix
        k: Embedding dimension

    Returns:
        Coordinates of shape (n, k), centered at the origin

    Raises:
        ContractError: Fewer than k + 1 items

    Example:
        >>> classical_mds(np.array([[0.0, 2.0], [2.0, 0.0]]), k=1).ravel()
        array([ 1., -1.])
    """
    values = distances.values if isinstance(distances, DistanceMatrix) else np.asarray(distances)
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    if n < k + 1:
        raise ContractError(f"MDS in {k} dimensions needs at least {k + 1} items, got {n}")

    evals, evecs = np.linalg.eigh(double_center(values))
    order = np.argsort(evals)[::-1][:k]
    evals = np.maximum(evals[order], 0.0)
    coords = evecs[:, order] * np.sqrt(evals)

    for axis in range(k):
        pivot = np.argmax(np.abs(coords[:, axis]))
        if coords[pivot, axis] < 0:
            coords[:, axis] = -coords[:, axis]
    return coords - coords.mean(axis=0, keepdims=True)
