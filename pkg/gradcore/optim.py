"""Trainable parameters and the Adam optimizer."""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from exceptions import NonFiniteGradientError
from gradcore.tensor import Tensor

ADAM_EPSILON = 1e-8


class Parameter(Tensor):
    """Leaf tensor with Adam moments and optional spectral-norm state.

    ``spectral_dim`` is the weight axis holding output channels; it becomes
    the row axis when the weight is viewed as a matrix.
    """

    def __init__(
        self,
        data: np.ndarray,
        name: Optional[str] = None,
        spectral_dim: int = 0,
    ) -> None:
        super().__init__(np.array(data, copy=True), requires_grad=True, name=name)
        self.adam_m = np.zeros_like(self.data)
        self.adam_v = np.zeros_like(self.data)
        self.step_count = 0
        self.spectral_u: Optional[np.ndarray] = None
        self.spectral_dim = spectral_dim

    @property
    def value(self) -> Tensor:
        return self

    def as_matrix(self) -> np.ndarray:
        moved = np.moveaxis(self.data, self.spectral_dim, 0)
        return moved.reshape(moved.shape[0], -1)

    def __repr__(self) -> str:
        return f"<Parameter {self.name} shape={self.shape} steps={self.step_count}>"


def zero_grad(params: Iterable[Tensor]) -> None:
    for param in params:
        param.grad = None


def adam_step(
    params: Sequence[Parameter],
    lr: float,
    beta1: float,
    beta2: float,
    epsilon: float = ADAM_EPSILON,
) -> None:
    """Bias-corrected Adam update of every parameter.

    A missing gradient counts as zero. All gradients are checked before any
    parameter moves, so a rejected step leaves the whole set untouched.

    Raises:
        NonFiniteGradientError: Some gradient holds NaN or infinity
    """
    for index, param in enumerate(params):
        if param.grad is not None and not np.all(np.isfinite(param.grad)):
            raise NonFiniteGradientError(param.name or f"param_{index}")

    for param in params:
        grad = param.grad if param.grad is not None else np.zeros_like(param.data)
        param.step_count += 1
        t = param.step_count
        param.adam_m = beta1 * param.adam_m + (1.0 - beta1) * grad
        param.adam_v = beta2 * param.adam_v + (1.0 - beta2) * grad * grad
        m_hat = param.adam_m / (1.0 - beta1**t)
        v_hat = param.adam_v / (1.0 - beta2**t)
        param.data = param.data - lr * m_hat / (np.sqrt(v_hat) + epsilon)


class Adam:
    """Adam over a fixed parameter list.

    Example:
        >>> optimizer = Adam(generator.parameters(), lr=2e-4, betas=(0.5, 0.999))
        >>> optimizer.zero_grad()
        >>> backward(loss)
        >>> optimizer.step()
    """

    def __init__(
        self,
        params: Iterable[Parameter],
        lr: float,
        betas: tuple[float, float] = (0.5, 0.999),
        epsilon: float = ADAM_EPSILON,
    ) -> None:
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.epsilon = epsilon

    @property
    def step_count(self) -> int:
        return self.params[0].step_count if self.params else 0

    def zero_grad(self) -> None:
        zero_grad(self.params)

    def step(self) -> None:
        adam_step(self.params, self.lr, self.beta1, self.beta2, self.epsilon)
