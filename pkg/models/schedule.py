"""Anisotropic growth schedule shared by the generator and its mirror."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

from exceptions import ConfigurationError

Triple = tuple[int, int, int]
GrowthPolicy = Literal["early-stop", "uniform"]


@dataclass(frozen=True)
class ScheduleStep:
    """One x2 growth stage: per-axis stride, kernel and padding."""

    stride: Triple
    kernel: Triple
    padding: Triple

    @property
    def active_axes(self) -> tuple[bool, bool, bool]:
        return tuple(s == 2 for s in self.stride)  # type: ignore[return-value]

    def residual_kernel(self, size: int = 3) -> Triple:
        """Kernel of stride-1 convolutions at this stage: ``size`` on active axes."""
        return tuple(size if active else 1 for active in self.active_axes)  # type: ignore[return-value]


def _log2_ratio(latent: int, target: int, axis: int) -> int:
    if latent < 1 or target < latent or target % latent:
        raise ConfigurationError(
            f"target extent {target} is not a multiple of latent extent {latent} on axis {axis}"
        )
    ratio = target // latent
    if ratio & (ratio - 1):
        raise ConfigurationError(f"ratio {ratio} on axis {axis} is not a power of two")
    return ratio.bit_length() - 1


def stride_schedule(
    latent_spatial: Sequence[int],
    target: Sequence[int],
    policy: GrowthPolicy = "early-stop",
    kernel_base: int = 4,
) -> list[ScheduleStep]:
    """Per-layer strides and kernels mapping the latent extents onto the target.

    Early-stop grows every axis by 2 per layer until it reaches its target and
    then holds it with stride 1 and kernel 1. Uniform strides by 2 on every
    axis and needs the same number of doublings on all of them.

    Args:
        latent_spatial: Latent extents (3 values)
        target: Output extents (3 values)
        policy: early-stop or uniform
        kernel_base: Kernel extent on doubled axes; padding is (kernel_base - 2) // 2

    Returns:
        One ScheduleStep per layer, empty when latent equals target

    Raises:
        ConfigurationError: Non-power-of-two ratio, or unequal layer counts under uniform

    Example:
        >>> [s.stride for s in stride_schedule((4, 4, 4), (128, 128, 16))]
        [(2, 2, 2), (2, 2, 2), (2, 2, 1), (2, 2, 1), (2, 2, 1)]
    """
    latent_t = tuple(int(v) for v in latent_spatial)
    target_t = tuple(int(v) for v in target)
    if len(latent_t) != 3 or len(target_t) != 3:
        raise ConfigurationError("latent and target must have 3 extents")
    doublings = [_log2_ratio(l, t, axis) for axis, (l, t) in enumerate(zip(latent_t, target_t))]
    pad_base = (kernel_base - 2) // 2

    if policy == "uniform":
        if len(set(doublings)) != 1:
            raise ConfigurationError(
                f"uniform growth needs equal doublings per axis, got {tuple(doublings)}"
            )
        step = ScheduleStep((2, 2, 2), (kernel_base,) * 3, (pad_base,) * 3)  # type: ignore[arg-type]
        return [step] * doublings[0]
    if policy != "early-stop":
        raise ConfigurationError(f"unknown growth policy: {policy}")

    steps = []
    running = list(latent_t)
    for _ in range(max(doublings)):
        stride = tuple(2 if r < t else 1 for r, t in zip(running, target_t))
        kernel = tuple(kernel_base if s == 2 else 1 for s in stride)
        padding = tuple(pad_base if s == 2 else 0 for s in stride)
        steps.append(ScheduleStep(stride, kernel, padding))  # type: ignore[arg-type]
        running = [r * s for r, s in zip(running, stride)]
    return steps


def upsampling_factors(steps: Sequence[ScheduleStep]) -> Triple:
    """Total per-axis growth of a schedule."""
    factors = [1, 1, 1]
    for step in steps:
        factors = [f * s for f, s in zip(factors, step.stride)]
    return tuple(factors)  # type: ignore[return-value]
