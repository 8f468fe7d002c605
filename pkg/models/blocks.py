"""Residual blocks for both networks."""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np

from exceptions import ConfigurationError
from gradcore import functional as F
from gradcore.tensor import Tensor
from models.base import Module
from models.layers import BatchNorm3d, ConditionalBatchNorm3d, Conv3d, InitMode, activation

Triple = tuple[int, int, int]
BlockMode = Literal["plain", "bottleneck"]
Resample = Literal["up", "down", "none"]

BOTTLENECK_REDUCTION = 4


class ResidualBlock(Module):
    """output = shortcut(x) + stack(x).

    The stack is norm, activation, optional upsampling, convolution, repeated;
    the bottleneck mode narrows to ``in_channels // 4`` with 1x1x1 convolutions
    around a single full-kernel convolution. Down blocks average-pool at the
    end of both branches. ``kernel`` holds 3 on axes that are resampled in
    this stage and 1 elsewhere.

    Args:
        in_channels: Input channels
        out_channels: Output channels
        rng: Generator for weight initialization
        mode: plain or bottleneck
        resample: up, down or none
        factors: Per-axis resampling factor (1 or 2)
        kernel: Per-axis kernel of the full convolutions
        norm: Include batch normalization
        latent_dim: When set, normalization is conditioned on a latent vector
        leaky: Leaky ReLU instead of ReLU
        slope: Leaky ReLU slope
        spectral: Spectral normalization of every convolution
        init: Weight initializer
        std: Normal initializer std
    """

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        rng: np.random.Generator,
        mode: BlockMode = "plain",
        resample: Resample = "none",
        factors: Triple = (1, 1, 1),
        kernel: Triple = (3, 3, 3),
        norm: bool = True,
        latent_dim: Optional[int] = None,
        leaky: bool = False,
        slope: float = 0.2,
        spectral: bool = False,
        init: InitMode = "normal",
        std: float = 0.02,
        n_power_iterations: int = 1,
    ) -> None:
        super().__init__()
        if resample == "none":
            factors = (1, 1, 1)
        self.mode = mode
        self.resample = resample
        self.factors = tuple(int(f) for f in factors)
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.conditional = latent_dim is not None

        conv_kwargs = dict(
            rng=rng, spectral=spectral, init=init, std=std, n_power_iterations=n_power_iterations
        )

        def make_norm(channels: int) -> Optional[Module]:
            if not norm:
                return None
            if latent_dim is not None:
                return ConditionalBatchNorm3d(channels, latent_dim)
            return BatchNorm3d(channels)

        if mode == "bottleneck":
            mid = max(1, in_channels // BOTTLENECK_REDUCTION)
            widths = [(in_channels, mid, (1, 1, 1)), (mid, mid, kernel), (mid, out_channels, (1, 1, 1))]
            self.upsample_before = 1
        else:
            widths = [(in_channels, out_channels, kernel), (out_channels, out_channels, kernel)]
            self.upsample_before = 0

        self.norms = [make_norm(c_in) for c_in, _, _ in widths]
        self.acts = [activation(leaky, slope) for _ in widths]
        self.convs = [
            Conv3d(c_in, c_out, k, padding=tuple((e - 1) // 2 for e in k), **conv_kwargs)  # type: ignore[arg-type]
            for c_in, c_out, k in widths
        ]

        needs_projection = in_channels != out_channels
        self.shortcut_conv = None
        if needs_projection:
            self.shortcut_conv = Conv3d(in_channels, out_channels, 1, **conv_kwargs)  # type: ignore[arg-type]

    def _stack(self, x: Tensor, latent: Optional[Tensor]) -> Tensor:
        h = x
        for index, (norm, act, conv) in enumerate(zip(self.norms, self.acts, self.convs)):
            if norm is not None:
                h = norm(h, latent) if self.conditional else norm(h)
            h = act(h)
            if self.resample == "up" and index == self.upsample_before:
                h = F.upsample(h, self.factors)
            h = conv(h)
        if self.resample == "down":
            h = F.avg_pool(h, self.factors)
        return h

    def _shortcut(self, x: Tensor) -> Tensor:
        h = x
        if self.resample == "up":
            h = F.upsample(h, self.factors)
        if self.shortcut_conv is not None:
            h = self.shortcut_conv(h)
        if self.resample == "down":
            h = F.avg_pool(h, self.factors)
        return h

    def forward(self, x: Tensor, latent: Optional[Tensor] = None) -> Tensor:  # type: ignore[override]
        stack = self._stack(x, latent)
        shortcut = self._shortcut(x)
        if stack.shape != shortcut.shape:
            raise ConfigurationError(
                f"residual branches disagree: stack {stack.shape} vs shortcut {shortcut.shape}"
            )
        return F.add(shortcut, stack)


def residual_block(
    x: Tensor, block: ResidualBlock, latent: Optional[Tensor] = None
) -> Tensor:
    """Functional entry point: apply ``block`` to ``x``."""
    return block(x, latent)
