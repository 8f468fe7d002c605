"""Central finite-difference oracle for gradient tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from gradcore import functional as F
from gradcore.tensor import Tensor, grad

DEFAULT_STEP = 1e-6
DEFAULT_FLOOR = 1e-4


@dataclass
class GradCheckResult:
    max_relative_error: float
    checked: int
    worst_input: int
    worst_index: tuple[int, ...]

    def passed(self, tolerance: float) -> bool:
        return self.max_relative_error <= tolerance


def relative_error(analytic: float, numeric: float, floor: float = DEFAULT_FLOOR) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def check_gradients(
    fn: Callable[..., Tensor],
    inputs: Sequence[Tensor],
    n_samples: int = 20,
    step: float = DEFAULT_STEP,
    floor: float = DEFAULT_FLOOR,
    seed: int = 0,
) -> GradCheckResult:
    """Compare recorded gradients against central differences.

    The scalar probed is ``sum(fn(*inputs) * R)`` for a fixed random R, so
    every output coordinate contributes. Up to ``n_samples`` coordinates are
    drawn per input; smaller inputs are checked exhaustively. Probes run with
    recording on so that functions which differentiate internally (gradient
    penalties) evaluate correctly.

    Args:
        fn: Function of the input tensors
        inputs: Tensors with ``requires_grad`` set
        n_samples: Coordinates checked per input
        step: Finite-difference step
        floor: Lower bound of the relative-error denominator
        seed: Seed for the projection and the coordinate draw

    Returns:
        GradCheckResult with the worst relative error found
    """
    rng = np.random.default_rng(seed)
    out = fn(*inputs)
    projection = Tensor(rng.standard_normal(out.shape))
    analytic = grad(F.sum(F.mul(out, projection)), list(inputs))

    def probe() -> float:
        return float(np.sum(fn(*inputs).data * projection.data))

    worst = GradCheckResult(0.0, 0, -1, ())
    for position, tensor in enumerate(inputs):
        flat_count = tensor.size
        if flat_count <= n_samples:
            coords = np.arange(flat_count)
        else:
            coords = rng.choice(flat_count, size=n_samples, replace=False)
        for flat in coords:
            index = np.unravel_index(int(flat), tensor.shape)
            original = tensor.data[index]
            tensor.data[index] = original + step
            plus = probe()
            tensor.data[index] = original - step
            minus = probe()
            tensor.data[index] = original
            numeric = (plus - minus) / (2.0 * step)
            error = relative_error(float(analytic[position].data[index]), numeric, floor)
            worst.checked += 1
            if error > worst.max_relative_error:
                worst.max_relative_error = error
                worst.worst_input = position
                worst.worst_index = tuple(int(i) for i in index)
    return worst


def numeric_gradient(
    fn: Callable[[], float], array: np.ndarray, step: float = DEFAULT_STEP, index: Optional[tuple] = None
) -> np.ndarray:
    """Full central-difference gradient of a scalar function of ``array`` (small arrays)."""
    result = np.zeros_like(array)
    indices = [index] if index is not None else list(np.ndindex(array.shape))
    for idx in indices:
        original = array[idx]
        array[idx] = original + step
        plus = fn()
        array[idx] = original - step
        minus = fn()
        array[idx] = original
        result[idx] = (plus - minus) / (2.0 * step)
    return result
