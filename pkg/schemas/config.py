"""Run configuration models.

Every model forbids unknown keys so that a typo in a ``--config`` document is
reported instead of silently ignored.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from exceptions import ConfigurationError

Triple = tuple[int, int, int]
ChannelName = Literal["coarse_fraction", "deposition_time", "facies"]

TUNED_BETAS = (0.0, 0.99)
DEFAULT_BETAS = (0.5, 0.999)


def _positive_triple(value: tuple[int, ...], name: str) -> tuple[int, ...]:
    if any(v < 1 for v in value):
        raise ValueError(f"{name} extents must be >= 1, got {value}")
    return value


class LatentSpec(BaseModel):
    """Shape of the generator input: ``dim`` channels over ``spatial`` cells."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    dim: int = Field(default=100, ge=1)
    spatial: Triple = (4, 4, 4)

    @field_validator("spatial")
    @classmethod
    def check_spatial(cls, value: Triple) -> Triple:
        return _positive_triple(value, "latent spatial")  # type: ignore[return-value]

    def shape(self, extra: Triple = (0, 0, 0)) -> tuple[int, int, int, int]:
        return (self.dim,) + tuple(s + e for s, e in zip(self.spatial, extra))  # type: ignore[return-value]


class ArchitectureConfig(BaseModel):
    """Switches of the ablation ladder plus widths and shapes."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Ladder switches
    leaky_g: bool = False
    logits_loss: bool = False
    tuned_betas: bool = False
    spectral_norm: bool = False
    spectral_generator_only: bool = False
    residual_blocks: bool = False
    bottleneck_blocks: bool = False
    no_batch_in_d: bool = False
    r1: bool = False
    double_blocks: bool = False
    orthogonal_init: bool = False
    latent_skip: bool = False

    # Optimization
    lr_g: float = Field(default=2e-4, gt=0)
    lr_d: float = Field(default=2e-4, gt=0)
    d_steps_per_g: int = Field(default=1, ge=1)
    loss_mode: Literal["nonsaturating_bce", "wgan_gp"] = "nonsaturating_bce"

    # Shapes
    base_channels: int = Field(default=32, ge=1)
    growth_policy: Literal["early-stop", "uniform"] = "early-stop"
    target_shape: Triple = (128, 128, 16)
    channels_out: int = Field(default=2, ge=1)
    kernel_base: int = Field(default=4, ge=2)
    leaky_slope: float = Field(default=0.2, ge=0.0, lt=1.0)
    latent: LatentSpec = Field(default_factory=LatentSpec)
    init_std: float = Field(default=0.02, gt=0)
    n_power_iterations: int = Field(default=1, ge=1)

    @field_validator("target_shape")
    @classmethod
    def check_target(cls, value: Triple) -> Triple:
        return _positive_triple(value, "target")  # type: ignore[return-value]

    @field_validator("kernel_base")
    @classmethod
    def check_kernel(cls, value: int) -> int:
        if value % 2:
            raise ValueError("kernel_base must be even for exact x2 upsampling")
        return value

    @property
    def betas(self) -> tuple[float, float]:
        return TUNED_BETAS if self.tuned_betas else DEFAULT_BETAS

    @property
    def spectral_in_generator(self) -> bool:
        return self.spectral_norm or self.spectral_generator_only

    @property
    def spectral_in_discriminator(self) -> bool:
        return self.spectral_norm and not self.spectral_generator_only

    @property
    def sigmoid_output(self) -> bool:
        """Whether the discriminator ends in a sigmoid (the DCGAN baseline)."""
        return self.loss_mode == "nonsaturating_bce" and not self.logits_loss


class SwdSettings(BaseModel):
    """Sliced Wasserstein settings shared by training validation and reports."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    patch_shape: Triple = (7, 7, 3)
    n_patches: int = Field(default=2048, ge=0)
    n_projections: int = Field(default=128, ge=1)
    max_levels: int = Field(default=3, ge=1)
    seed: int = Field(default=0, ge=0)
    standardize: Literal["patch", "set"] = "patch"
    channels: Optional[list[int]] = None

    @field_validator("patch_shape")
    @classmethod
    def check_patch(cls, value: Triple) -> Triple:
        return _positive_triple(value, "patch")  # type: ignore[return-value]


class TrainConfig(BaseModel):
    """Training-loop knobs."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    batch_size: int = Field(default=64, ge=2)
    total_g_iterations: int = Field(default=1000, ge=0)
    d_steps_per_g: int = Field(default=1, ge=1)
    lr_g: float = Field(default=2e-4, gt=0)
    lr_d: float = Field(default=2e-4, gt=0)
    beta1: float = Field(default=0.5, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    r1_enabled: bool = False
    r1_weight: float = Field(default=10.0, ge=0.0)
    r1_interval: int = Field(default=16, ge=1)
    logits_loss: bool = True
    loss_mode: Literal["nonsaturating_bce", "wgan_gp"] = "nonsaturating_bce"
    gp_weight: float = Field(default=10.0, ge=0.0)
    validation_interval: int = Field(default=100, ge=1)
    validation_batch: int = Field(default=64, ge=1)
    checkpoint_interval: int = Field(default=500, ge=1)
    seed: int = Field(default=0, ge=0)
    swd: SwdSettings = Field(default_factory=SwdSettings)

    @classmethod
    def from_architecture(cls, architecture: ArchitectureConfig, **overrides: Any) -> "TrainConfig":
        """Copy rates, betas, loss form and regularization from an architecture.

        Example:
            >>> arch = resolve_preset("arch5")
            >>> TrainConfig.from_architecture(arch, total_g_iterations=2000).d_steps_per_g
            2
        """
        beta1, beta2 = architecture.betas
        values: dict[str, Any] = {
            "lr_g": architecture.lr_g,
            "lr_d": architecture.lr_d,
            "beta1": beta1,
            "beta2": beta2,
            "d_steps_per_g": architecture.d_steps_per_g,
            "r1_enabled": architecture.r1,
            "logits_loss": not architecture.sigmoid_output,
            "loss_mode": architecture.loss_mode,
        }
        values.update(overrides)
        return cls.model_validate(values)


class SynthParams(BaseModel):
    """Procedural stratigraphy parameters (one realization per seed)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    dims: Triple = (32, 48, 12)
    cell_size: tuple[float, float, float] = (50.0, 50.0, 0.5)
    n_layers: int = Field(default=12, ge=1)
    channel_width_cells: float = Field(default=4.0, gt=0)
    meander_amplitude: float = Field(default=6.0, ge=0)
    meander_wavelength_cells: float = Field(default=24.0, gt=0)
    drift_rate: float = Field(default=1.5, ge=0)
    coarse_in_channel: float = Field(default=0.95, ge=0, le=1)
    coarse_falloff: float = Field(default=1.0, gt=0)
    overbank_coarse: float = Field(default=0.05, ge=0, le=1)
    coarse_noise: float = Field(default=0.02, ge=0, le=0.5)
    years_per_layer: float = Field(default=100.0, gt=0)
    time_jitter: float = Field(default=0.25, ge=0, lt=0.5)
    topography_relief: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def check_layers(self) -> "SynthParams":
        _positive_triple(self.dims, "dims")
        if self.n_layers > self.dims[2]:
            raise ValueError(f"n_layers {self.n_layers} exceeds nz {self.dims[2]}")
        if self.topography_relief >= self.n_layers:
            raise ValueError("topography_relief must leave the bottom layer filled")
        if any(c <= 0 for c in self.cell_size):
            raise ValueError("cell sizes must be positive")
        return self


class DataConfig(BaseModel):
    """Where samples come from and how they are preprocessed."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    source: Literal["synth", "flvd"] = "synth"
    path: Optional[str] = None
    n_volumes: int = Field(default=512, ge=1)
    synth: SynthParams = Field(default_factory=SynthParams)
    z_window_m: Optional[tuple[float, float]] = None
    sample_size: Triple = (32, 32, 8)
    channels: list[ChannelName] = Field(
        default_factory=lambda: ["coarse_fraction", "deposition_time"]
    )
    crop_mode: Literal["random", "fixed"] = "random"
    fixed_offset: Triple = (0, 0, 0)
    must_contain_channel: bool = False
    channel_threshold: float = Field(default=0.5, ge=0, le=1)
    max_retries: int = Field(default=100, ge=1)
    time_scaling: Literal["sample", "realization"] = "sample"
    reference_sampling: Literal["random", "extremity"] = "random"
    d_coarse_mm: float = Field(default=0.5, gt=0)
    d_fine_mm: float = Field(default=0.01, gt=0)
    grain_mixing: Literal["linear", "phi"] = "linear"
    train_limit: Optional[int] = Field(default=None, ge=1)
    # Preprocessed realizations kept in memory; least recently used are evicted.
    cache_size: int = Field(default=1024, ge=1)

    @model_validator(mode="after")
    def check_data(self) -> "DataConfig":
        if not self.channels:
            raise ValueError("at least one channel is required")
        if len(set(self.channels)) != len(self.channels):
            raise ValueError(f"duplicate channels: {self.channels}")
        if self.source == "flvd" and not self.path:
            raise ValueError("flvd source requires a path")
        if self.d_fine_mm >= self.d_coarse_mm:
            raise ValueError("d_fine_mm must be smaller than d_coarse_mm")
        return self


class SplitConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_train: int = Field(default=448, ge=0)
    n_val: int = Field(default=48, ge=0)
    n_test: int = Field(default=16, ge=0)
    mode: Literal["random", "fixed-tail"] = "random"
    seed: int = Field(default=0, ge=0)


class ResolvedRunConfig(BaseModel):
    """Complete configuration of a run, echoed into ``config.json``."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    preset: str
    architecture: ArchitectureConfig
    train: TrainConfig
    data: DataConfig
    split: SplitConfig
    out: Optional[str] = None


class RunConfig(BaseModel):
    """User-facing run configuration.

    ``architecture`` and ``train`` hold overrides applied on top of the
    preset; a dumped :class:`ResolvedRunConfig` loads back unchanged because
    its full sections are valid override dictionaries.
    """

    model_config = ConfigDict(extra="forbid")

    preset: str = "arch4"
    architecture: dict[str, Any] = Field(default_factory=dict)
    train: dict[str, Any] = Field(default_factory=dict)
    data: DataConfig = Field(default_factory=DataConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)
    out: Optional[str] = None
    seed: Optional[int] = Field(default=None, ge=0)

    def resolve(self) -> ResolvedRunConfig:
        """Resolve the preset and overrides into a complete configuration.

        Raises:
            ConfigurationError: Unknown preset or overrides conflicting with the data shape
        """
        from models.presets import resolve_preset

        derived = {"channels_out": len(self.data.channels), "target_shape": tuple(self.data.sample_size)}
        for key, value in derived.items():
            if key not in self.architecture:
                continue
            given = self.architecture[key]
            if (tuple(given) if isinstance(given, (list, tuple)) else given) != value:
                raise ConfigurationError(
                    f"architecture.{key}={given} conflicts with the data configuration ({value})"
                )
        architecture = resolve_preset(self.preset, **{**self.architecture, **derived})

        train_overrides = dict(self.train)
        if self.seed is not None:
            train_overrides["seed"] = self.seed
        train = TrainConfig.from_architecture(architecture, **train_overrides)

        return ResolvedRunConfig(
            preset=self.preset,
            architecture=architecture,
            train=train,
            data=self.data,
            split=self.split,
            out=self.out,
        )
