"""Discriminator networks, mirroring the generator schedule."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from exceptions import ConfigurationError
from gradcore.tensor import Tensor
from models.base import Module, Sequential
from models.blocks import ResidualBlock
from models.layers import BatchNorm3d, Conv3d, Flatten, LeakyReLU, Sigmoid
from models.schedule import ScheduleStep, stride_schedule
from schemas.config import ArchitectureConfig
from utils.logger import get_logger

logger = get_logger(__name__)


class Discriminator(Module):
    """Maps [N, channels, X, Y, Z] to one score per item, shape [N, 1].

    The score is a probability only for the sigmoid-terminated baseline and a
    raw logit (or critic value) otherwise.
    """

    def __init__(self, config: ArchitectureConfig, rng: np.random.Generator) -> None:
        super().__init__()
        self.config = config
        schedule = stride_schedule(
            config.latent.spatial, config.target_shape, config.growth_policy, config.kernel_base
        )
        self.schedule: list[ScheduleStep] = list(reversed(schedule))
        init = "orthogonal" if config.orthogonal_init else "normal"
        conv_kwargs = dict(
            rng=rng,
            spectral=config.spectral_in_discriminator,
            init=init,
            std=config.init_std,
            n_power_iterations=config.n_power_iterations,
        )
        widths = [min(config.base_channels * 2**j, 8 * config.base_channels) for j in range(len(schedule))]
        in_channels = config.channels_out
        layers: list[Module] = []
        self.blocks: list[ResidualBlock] = []
        if config.residual_blocks:
            mode = "bottleneck" if config.bottleneck_blocks else "plain"
            for step, width in zip(self.schedule, widths):
                common = dict(
                    mode=mode,
                    kernel=step.residual_kernel(),
                    norm=not config.no_batch_in_d,
                    leaky=True,
                    slope=config.leaky_slope,
                    **conv_kwargs,
                )
                self.blocks.append(
                    ResidualBlock(in_channels, width, resample="down", factors=step.stride, **common)
                )
                if config.double_blocks:
                    self.blocks.append(ResidualBlock(width, width, resample="none", **common))
                in_channels = width
            layers.append(LeakyReLU(config.leaky_slope))
        else:
            for index, (step, width) in enumerate(zip(self.schedule, widths)):
                use_norm = index > 0 and not config.no_batch_in_d
                layers.append(
                    Conv3d(
                        in_channels,
                        width,
                        step.kernel,
                        stride=step.stride,
                        padding=step.padding,
                        bias=not use_norm,
                        **conv_kwargs,
                    )
                )
                if use_norm:
                    layers.append(BatchNorm3d(width))
                layers.append(LeakyReLU(config.leaky_slope))
                in_channels = width
        self.body = Sequential(*layers)

        # A kernel covering the remaining extent reduces each item to one score.
        head: list[Module] = [Conv3d(in_channels, 1, config.latent.spatial, **conv_kwargs), Flatten()]
        if config.sigmoid_output:
            head.append(Sigmoid())
        self.head = Sequential(*head)

    @property
    def input_shape(self) -> tuple[int, ...]:
        return (self.config.channels_out,) + tuple(self.config.target_shape)

    def forward(self, x: Tensor) -> Tensor:
        h = x
        for block in self.blocks:
            h = block(h)
        return self.head(self.body(h))


def build_discriminator(
    config: ArchitectureConfig,
    input_shape: Optional[Sequence[int]] = None,
    rng: Optional[np.random.Generator] = None,
    seed: int = 0,
) -> Discriminator:
    """Build the discriminator of an architecture.

    Args:
        config: Architecture configuration
        input_shape: Expected (channels, X, Y, Z); must match the configuration
        rng: Initialization generator; ``default_rng(seed)`` when omitted
        seed: Seed used without ``rng``

    Returns:
        Discriminator in train mode, parameters named ``D.*``

    Raises:
        ConfigurationError: Input shape does not reduce to the latent extents
    """
    expected = (config.channels_out,) + tuple(config.target_shape)
    if input_shape is not None and tuple(input_shape) != expected:
        raise ConfigurationError(f"discriminator input {tuple(input_shape)} differs from {expected}")
    discriminator = Discriminator(config, rng if rng is not None else np.random.default_rng(seed))
    discriminator.assign_names("D")
    logger.debug(
        "discriminator_built",
        stages=len(discriminator.schedule),
        blocks=len(discriminator.blocks),
        parameters=discriminator.parameter_count(),
    )
    return discriminator
