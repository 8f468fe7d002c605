"""Generator networks for every rung of the ladder."""

from __future__ import annotations

from typing import Optional

import numpy as np

from gradcore import functional as F
from gradcore.tensor import Tensor
from models.base import Module, Sequential
from models.blocks import ResidualBlock
from models.layers import BatchNorm3d, Conv3d, ConvTranspose3d, Tanh, activation
from models.schedule import ScheduleStep, stride_schedule, upsampling_factors
from schemas.config import ArchitectureConfig, LatentSpec
from utils.logger import get_logger

logger = get_logger(__name__)


def stage_widths(base: int, n_stages: int) -> list[int]:
    """Channel widths from the latent side, ending at ``base`` and capped at 8 * base."""
    return [min(base * 2 ** (n_stages - 1 - i), 8 * base) for i in range(n_stages)]


class Generator(Module):
    """Maps a latent tensor [N, dim, sx, sy, sz] to samples in [-1, 1].

    Fully convolutional, so a larger latent yields a proportionally larger
    output.
    """

    def __init__(self, config: ArchitectureConfig, rng: np.random.Generator) -> None:
        super().__init__()
        self.config = config
        self.schedule: list[ScheduleStep] = stride_schedule(
            config.latent.spatial, config.target_shape, config.growth_policy, config.kernel_base
        )
        self.latent_skip = config.residual_blocks and config.latent_skip
        init = "orthogonal" if config.orthogonal_init else "normal"
        spectral = config.spectral_in_generator
        conv_kwargs = dict(
            rng=rng,
            spectral=spectral,
            init=init,
            std=config.init_std,
            n_power_iterations=config.n_power_iterations,
        )
        if config.residual_blocks:
            self._build_residual(config, conv_kwargs)
        else:
            self._build_plain(config, conv_kwargs)

    def _build_plain(self, config: ArchitectureConfig, conv_kwargs: dict) -> None:
        steps = self.schedule
        in_channels = config.latent.dim
        layers: list[Module] = []
        if not steps:
            layers += [Conv3d(in_channels, config.channels_out, 3, padding=1, **conv_kwargs), Tanh()]
        hidden = stage_widths(config.base_channels, max(len(steps) - 1, 0))
        for index, step in enumerate(steps):
            last = index == len(steps) - 1
            out_channels = config.channels_out if last else hidden[index]
            layers.append(
                ConvTranspose3d(
                    in_channels,
                    out_channels,
                    step.kernel,
                    stride=step.stride,
                    padding=step.padding,
                    bias=last,
                    **conv_kwargs,
                )
            )
            if last:
                layers.append(Tanh())
            else:
                layers += [BatchNorm3d(out_channels), activation(config.leaky_g, config.leaky_slope)]
            in_channels = out_channels
        self.body = Sequential(*layers)
        self.blocks: list[ResidualBlock] = []

    def _build_residual(self, config: ArchitectureConfig, conv_kwargs: dict) -> None:
        steps = self.schedule
        widths = stage_widths(config.base_channels, len(steps))
        latent_dim = config.latent.dim if self.latent_skip else None
        mode = "bottleneck" if config.bottleneck_blocks else "plain"
        in_channels = config.latent.dim
        blocks = []
        for step, width in zip(steps, widths):
            common = dict(
                mode=mode,
                kernel=step.residual_kernel(),
                norm=True,
                latent_dim=latent_dim,
                leaky=config.leaky_g,
                slope=config.leaky_slope,
                **conv_kwargs,
            )
            blocks.append(ResidualBlock(in_channels, width, resample="up", factors=step.stride, **common))
            if config.double_blocks:
                blocks.append(ResidualBlock(width, width, resample="none", **common))
            in_channels = width
        self.blocks = blocks
        kernel = steps[-1].residual_kernel() if steps else (3, 3, 3)
        self.out_norm = BatchNorm3d(in_channels)
        self.out_act = activation(config.leaky_g, config.leaky_slope)
        self.out_conv = Conv3d(
            in_channels,
            config.channels_out,
            kernel,
            padding=tuple((k - 1) // 2 for k in kernel),
            **conv_kwargs,
        )
        self.out_tanh = Tanh()
        self.body = None

    @property
    def upsampling(self) -> tuple[int, int, int]:
        return upsampling_factors(self.schedule)

    def latent_shape(self, batch: int, extra: tuple[int, int, int] = (0, 0, 0)) -> tuple[int, ...]:
        return (batch,) + self.config.latent.shape(extra)

    def forward(self, z: Tensor) -> Tensor:
        if self.body is not None:
            return self.body(z)
        latent_vector: Optional[Tensor] = F.mean(z, axis=(2, 3, 4)) if self.latent_skip else None
        h = z
        for block in self.blocks:
            h = block(h, latent_vector)
        h = self.out_act(self.out_norm(h))
        return self.out_tanh(self.out_conv(h))


def build_generator(
    config: ArchitectureConfig,
    latent_spec: Optional[LatentSpec] = None,
    rng: Optional[np.random.Generator] = None,
    seed: int = 0,
) -> Generator:
    """Build the generator of an architecture.

    Args:
        config: Architecture configuration
        latent_spec: Replaces ``config.latent`` when given
        rng: Initialization generator; ``default_rng(seed)`` when omitted
        seed: Seed used without ``rng``

    Returns:
        Generator in train mode, parameters named ``G.*``

    Raises:
        ConfigurationError: No valid schedule from the latent to the target
    """
    if latent_spec is not None:
        config = config.model_copy(update={"latent": latent_spec})
    generator = Generator(config, rng if rng is not None else np.random.default_rng(seed))
    generator.assign_names("G")
    logger.debug(
        "generator_built",
        stages=len(generator.schedule),
        blocks=len(generator.blocks),
        parameters=generator.parameter_count(),
    )
    return generator
