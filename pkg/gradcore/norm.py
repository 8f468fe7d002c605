"""Batch normalization and its latent-conditioned variant."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from exceptions import ConfigurationError, DegenerateBatchError
from gradcore import functional as F
from gradcore.tensor import ArrayLike, Tensor, as_tensor

DEFAULT_MOMENTUM = 0.9
DEFAULT_EPSILON = 1e-5


@dataclass
class RunningStats:
    """Exponential moving averages of per-channel mean and variance.

    ``momentum`` is the weight kept on the previous value:
    running = momentum * running + (1 - momentum) * batch.
    """

    mean: np.ndarray
    var: np.ndarray
    momentum: float = DEFAULT_MOMENTUM
    updates: int = field(default=0)

    @classmethod
    def fresh(cls, channels: int, momentum: float = DEFAULT_MOMENTUM) -> "RunningStats":
        return cls(mean=np.zeros(channels), var=np.ones(channels), momentum=momentum)

    def update(self, batch_mean: np.ndarray, batch_var_unbiased: np.ndarray) -> None:
        self.mean = self.momentum * self.mean + (1.0 - self.momentum) * batch_mean
        self.var = self.momentum * self.var + (1.0 - self.momentum) * batch_var_unbiased
        self.updates += 1


def _channel_view(values: Tensor, ndim: int) -> Tensor:
    """[C] -> [1, C, 1, ...] or [N, C] -> [N, C, 1, ...]."""
    if values.ndim == 1:
        return F.reshape(values, (1, values.shape[0]) + (1,) * (ndim - 2))
    return F.reshape(values, values.shape + (1,) * (ndim - 2))


def _standardize(
    x: Tensor,
    running_stats: Optional[RunningStats],
    training: bool,
    epsilon: float,
) -> Tensor:
    if x.ndim < 2:
        raise ConfigurationError(f"batch norm expects [N, C, ...] input, got {x.shape}")
    axes = (0,) + tuple(range(2, x.ndim))
    if training:
        if x.shape[0] < 2:
            raise DegenerateBatchError(
                f"batch norm in train mode needs at least 2 items, got {x.shape[0]}"
            )
        mean = F.mean(x, axis=axes, keepdims=True)
        centered = F.sub(x, mean)
        var = F.mean(F.mul(centered, centered), axis=axes, keepdims=True)
        if running_stats is not None:
            count = x.size // x.shape[1]
            batch_var = var.data.reshape(-1) * count / max(count - 1, 1)
            running_stats.update(mean.data.reshape(-1), batch_var)
        return F.div(centered, F.sqrt(F.add(var, epsilon)))

    if running_stats is None:
        raise ConfigurationError("eval-mode batch norm requires running statistics")
    shape = (1, x.shape[1]) + (1,) * (x.ndim - 2)
    mean = Tensor(running_stats.mean.reshape(shape).astype(x.dtype))
    scale = Tensor((1.0 / np.sqrt(running_stats.var + epsilon)).reshape(shape).astype(x.dtype))
    return F.mul(F.sub(x, mean), scale)


def batch_norm(
    input: ArrayLike,
    gamma: ArrayLike,
    beta: ArrayLike,
    running_stats: Optional[RunningStats] = None,
    training: bool = True,
    epsilon: float = DEFAULT_EPSILON,
) -> Tensor:
    """Per-channel standardization followed by an affine transform.

    Args:
        input: Tensor [N, C, ...]
        gamma: Scale, shape [C]
        beta: Shift, shape [C]
        running_stats: Moving averages; updated in train mode, used in eval mode
        training: Train mode uses batch statistics
        epsilon: Added to the variance

    Returns:
        Normalized tensor of the input shape

    Raises:
        DegenerateBatchError: N = 1 in train mode
    """
    x = as_tensor(input)
    xhat = _standardize(x, running_stats, training, epsilon)
    return F.add(F.mul(xhat, _channel_view(as_tensor(gamma), x.ndim)), _channel_view(as_tensor(beta), x.ndim))


def conditional_batch_norm(
    input: ArrayLike,
    latent: ArrayLike,
    weight_gamma: ArrayLike,
    weight_beta: ArrayLike,
    running_stats: Optional[RunningStats] = None,
    training: bool = True,
    epsilon: float = DEFAULT_EPSILON,
) -> Tensor:
    """Batch norm whose affine parameters are projections of a latent vector.

    gamma = 1 + z @ W_g and beta = z @ W_b, with z of shape [N, d] (or [d],
    shared by the batch) and projections of shape [d, C].
    """
    x = as_tensor(input)
    z = as_tensor(latent)
    if z.ndim == 1:
        z = F.reshape(z, (1, z.shape[0]))
    w_gamma, w_beta = as_tensor(weight_gamma), as_tensor(weight_beta)
    if z.shape[1] != w_gamma.shape[0] or w_gamma.shape[1] != x.shape[1]:
        raise ConfigurationError(
            f"latent {z.shape} and projection {w_gamma.shape} do not fit {x.shape[1]} channels"
        )
    xhat = _standardize(x, running_stats, training, epsilon)
    gamma = F.add(F.matmul(z, w_gamma), 1.0)
    beta = F.matmul(z, w_beta)
    return F.add(F.mul(xhat, _channel_view(gamma, x.ndim)), _channel_view(beta, x.ndim))
