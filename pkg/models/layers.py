"""Parameterized layers wrapping the gradcore primitives."""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np

from exceptions import ContractError
from gradcore import functional as F
from gradcore.conv import IntOrTriple, as_triple, conv3d, conv3d_transposed
from gradcore.init import NORMAL_STD, init_normal, init_orthogonal
from gradcore.norm import RunningStats, batch_norm, conditional_batch_norm
from gradcore.optim import Parameter
from gradcore.spectral import initial_u, spectral_normalize
from gradcore.tensor import Tensor
from models.base import Module

InitMode = Literal["normal", "orthogonal"]


class _ConvBase(Module):
    def __init__(
        self,
        weight_shape: tuple[int, ...],
        out_channels: int,
        stride: IntOrTriple,
        padding: IntOrTriple,
        rng: np.random.Generator,
        bias: bool,
        spectral: bool,
        init: InitMode,
        std: float,
        spectral_dim: int,
        n_power_iterations: int,
    ) -> None:
        super().__init__()
        self.stride = as_triple(stride, "stride")
        self.padding = as_triple(padding, "padding")
        if init == "orthogonal":
            values = init_orthogonal(weight_shape, rng, rows_axis=spectral_dim)
        else:
            values = init_normal(weight_shape, rng, std)
        self.weight = Parameter(values, spectral_dim=spectral_dim)
        self.bias = Parameter(np.zeros(out_channels)) if bias else None
        self.spectral = spectral
        self.n_power_iterations = n_power_iterations
        if spectral:
            self.weight.spectral_u = initial_u(weight_shape[spectral_dim], rng)

    def effective_weight(self) -> Tensor:
        if not self.spectral:
            return self.weight
        return spectral_normalize(
            self.weight,
            n_power_iterations=self.n_power_iterations,
            update=self.training and self.update_running_stats,
        )


class Conv3d(_ConvBase):
    """Strided 3D convolution with weight [out, in, kx, ky, kz]."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel: IntOrTriple,
        rng: np.random.Generator,
        stride: IntOrTriple = 1,
        padding: IntOrTriple = 0,
        bias: bool = True,
        spectral: bool = False,
        init: InitMode = "normal",
        std: float = NORMAL_STD,
        n_power_iterations: int = 1,
    ) -> None:
        kernel_t = as_triple(kernel, "kernel")
        super().__init__(
            (out_channels, in_channels, *kernel_t),
            out_channels,
            stride,
            padding,
            rng,
            bias,
            spectral,
            init,
            std,
            spectral_dim=0,
            n_power_iterations=n_power_iterations,
        )
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel_t

    def forward(self, x: Tensor) -> Tensor:
        return conv3d(x, self.effective_weight(), self.bias, self.stride, self.padding)


class ConvTranspose3d(_ConvBase):
    """Transposed 3D convolution with weight [in, out, kx, ky, kz]."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel: IntOrTriple,
        rng: np.random.Generator,
        stride: IntOrTriple = 1,
        padding: IntOrTriple = 0,
        bias: bool = True,
        spectral: bool = False,
        init: InitMode = "normal",
        std: float = NORMAL_STD,
        n_power_iterations: int = 1,
    ) -> None:
        kernel_t = as_triple(kernel, "kernel")
        super().__init__(
            (in_channels, out_channels, *kernel_t),
            out_channels,
            stride,
            padding,
            rng,
            bias,
            spectral,
            init,
            std,
            spectral_dim=1,
            n_power_iterations=n_power_iterations,
        )
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel_t

    def forward(self, x: Tensor) -> Tensor:
        return conv3d_transposed(x, self.effective_weight(), self.bias, self.stride, self.padding)


class BatchNorm3d(Module):
    def __init__(self, channels: int, epsilon: float = 1e-5, momentum: float = 0.9) -> None:
        super().__init__()
        self.gamma = Parameter(np.ones(channels))
        self.beta = Parameter(np.zeros(channels))
        self.running_stats = RunningStats.fresh(channels, momentum)
        self.epsilon = epsilon

    def forward(self, x: Tensor) -> Tensor:
        stats = self.running_stats if (self.update_running_stats or not self.training) else None
        return batch_norm(x, self.gamma, self.beta, stats, self.training, self.epsilon)


class ConditionalBatchNorm3d(Module):
    """Batch norm whose scale and shift are linear in a latent vector.

    Projections start at zero, so a fresh layer behaves like plain batch norm.
    """

    def __init__(
        self, channels: int, latent_dim: int, epsilon: float = 1e-5, momentum: float = 0.9
    ) -> None:
        super().__init__()
        self.weight_gamma = Parameter(np.zeros((latent_dim, channels)))
        self.weight_beta = Parameter(np.zeros((latent_dim, channels)))
        self.running_stats = RunningStats.fresh(channels, momentum)
        self.epsilon = epsilon

    def forward(self, x: Tensor, latent: Optional[Tensor] = None) -> Tensor:  # type: ignore[override]
        if latent is None:
            raise ContractError("conditional batch norm needs a latent vector")
        stats = self.running_stats if (self.update_running_stats or not self.training) else None
        return conditional_batch_norm(
            x, latent, self.weight_gamma, self.weight_beta, stats, self.training, self.epsilon
        )


class ReLU(Module):
    def forward(self, x: Tensor) -> Tensor:
        return F.relu(x)


class LeakyReLU(Module):
    def __init__(self, slope: float = 0.2) -> None:
        super().__init__()
        self.slope = slope

    def forward(self, x: Tensor) -> Tensor:
        return F.leaky_relu(x, self.slope)


class Tanh(Module):
    def forward(self, x: Tensor) -> Tensor:
        return F.tanh(x)


class Sigmoid(Module):
    def forward(self, x: Tensor) -> Tensor:
        return F.sigmoid(x)


class Flatten(Module):
    def forward(self, x: Tensor) -> Tensor:
        return F.flatten_batch(x)


def activation(leaky: bool, slope: float = 0.2) -> Module:
    return LeakyReLU(slope) if leaky else ReLU()
