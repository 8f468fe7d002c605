"""Named rungs of the architecture ladder.

Presets are plain override dictionaries on top of the DCGAN defaults of
:class:`ArchitectureConfig`, so a rung can be remapped by editing data.
"""

from __future__ import annotations

from typing import Any

from exceptions import ConfigurationError
from schemas.config import ArchitectureConfig

_ARCH1 = {"leaky_g": True, "logits_loss": True, "tuned_betas": True}
_ARCH3 = {
    **_ARCH1,
    "residual_blocks": True,
    "bottleneck_blocks": True,
    "no_batch_in_d": True,
    "spectral_norm": True,
}
_ARCH3B = {**_ARCH3, "spectral_norm": False}
_ARCH4 = {**_ARCH3, "r1": True}
_ARCH5 = {**_ARCH4, "lr_g": 5e-5, "d_steps_per_g": 2}
_ARCH6 = {**_ARCH5, "double_blocks": True}
_ARCH7 = {**_ARCH6, "orthogonal_init": True}

_WGAN0 = {"loss_mode": "wgan_gp"}
_WGAN1 = {**_WGAN0, "leaky_g": True, "tuned_betas": True}
_WGAN2 = {**_WGAN1, "residual_blocks": True, "bottleneck_blocks": True, "no_batch_in_d": True}
_WGAN3 = {**_WGAN2, "spectral_norm": True}
_WGAN4 = {**_WGAN3, "r1": True}

PRESETS: dict[str, dict[str, Any]] = {
    "custom": {},
    "arch0": {},
    "arch1": _ARCH1,
    "arch2": {**_ARCH1, "spectral_norm": True},
    "arch3": _ARCH3,
    "arch3b": _ARCH3B,
    "arch3g": {**_ARCH3, "spectral_norm": False, "spectral_generator_only": True},
    "arch4": _ARCH4,
    "arch4d": {**_ARCH3B, "r1": True},
    "arch4m": {**_ARCH4, "lr_g": 1e-4, "lr_d": 4e-4},
    "arch5": _ARCH5,
    "arch6": _ARCH6,
    "arch7": _ARCH7,
    "arch8": {**_ARCH7, "latent_skip": True},
    "wgan0": _WGAN0,
    "wgan1": _WGAN1,
    "wgan2": _WGAN2,
    "wgan3": _WGAN3,
    "wgan4": _WGAN4,
    "wgan5": {**_WGAN4, "lr_g": 5e-5, "d_steps_per_g": 2},
}


def preset_names() -> list[str]:
    return sorted(PRESETS)


def resolve_preset(name: str, **overrides: Any) -> ArchitectureConfig:
    """Build the configuration of a named rung, optionally with field overrides.

    Args:
        name: Preset name (arch0..arch8, arch3b, arch3g, arch4d, arch4m, wgan0..wgan5, custom)
        **overrides: ArchitectureConfig fields replacing the preset values

    Returns:
        Frozen ArchitectureConfig

    Raises:
        ConfigurationError: Unknown preset name
    """
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset '{name}'; known: {', '.join(preset_names())}")
    return ArchitectureConfig.model_validate({**PRESETS[name], **overrides})
