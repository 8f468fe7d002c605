"""Sample generation from checkpoints: plain, interpolated, extrapolated."""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from exceptions import ConfigurationError, ContractError
from geovalid.superposition import superposition_fraction
from gradcore.tensor import Tensor, get_default_dtype, no_grad
from models.generator import Generator, build_generator
from repositories.checkpoint_repository import Checkpoint, load_checkpoint
from repositories.volume_repository import save_volume
from schemas.config import ResolvedRunConfig
from schemas.volume import TIME, Sample
from services.preprocessing_service import unscale_sample
from utils.logger import get_logger

logger = get_logger(__name__)

Triple = tuple[int, int, int]

# Below this angle slerp falls back to linear interpolation
SLERP_MIN_ANGLE = 1e-7


@dataclass
class Extrapolation:
    sample: np.ndarray
    latent_shape: tuple[int, ...]
    f_s: Optional[float]


def generator_from_checkpoint(checkpoint: Checkpoint) -> tuple[Generator, ResolvedRunConfig]:
    """Rebuild the generator stored in a checkpoint, in eval mode.

    Raises:
        ConfigurationError: The checkpoint carries no configuration
    """
    if "config" not in checkpoint.metadata:
        raise ConfigurationError("checkpoint does not carry its run configuration")
    config = ResolvedRunConfig.model_validate(checkpoint.metadata["config"])
    generator = build_generator(config.architecture)
    generator.load_state_dict(checkpoint.arrays, "G")
    generator.eval()
    return generator, config


def lerp_grid_weights(u: float, v: float) -> tuple[float, float, float, float]:
    """Bilinear weights of corners (z00, z01, z10, z11)."""
    return ((1 - u) * (1 - v), (1 - u) * v, u * (1 - v), u * v)


def slerp(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """Spherical interpolation of two latents treated as flat vectors."""
    fa, fb = a.ravel(), b.ravel()
    cosine = np.dot(fa, fb) / (np.linalg.norm(fa) * np.linalg.norm(fb))
    omega = float(np.arccos(np.clip(cosine, -1.0, 1.0)))
    if omega < SLERP_MIN_ANGLE:
        return (1.0 - t) * a + t * b
    sin_omega = np.sin(omega)
    return (np.sin((1.0 - t) * omega) / sin_omega) * a + (np.sin(t * omega) / sin_omega) * b


class SamplingService:
    """Draws samples from a trained generator.

    Every sample is generated alone (batch of one) in eval mode, so a latent
    always maps to the same output regardless of how many are drawn.
    """

    def __init__(self, generator: Generator, config: ResolvedRunConfig) -> None:
        """Initialize sampling service.

        Args:
            generator: Generator (switched to eval mode)
            config: Run configuration of the generator
        """
        self.generator = generator.eval()
        self.config = config
        self.channels = tuple(config.data.channels)

    @classmethod
    def from_checkpoint(cls, path: Union[str, Path]) -> "SamplingService":
        generator, config = generator_from_checkpoint(load_checkpoint(path))
        return cls(generator, config)

    def latent(self, rng: np.random.Generator, extra: Triple = (0, 0, 0)) -> np.ndarray:
        return rng.standard_normal(self.generator.latent_shape(1, extra))

    def decode(self, latent: np.ndarray) -> np.ndarray:
        """Sample [C, X, Y, Z] for a single latent [1, dim, sx, sy, sz]."""
        with no_grad():
            out = self.generator(Tensor(np.asarray(latent, dtype=get_default_dtype())))
        return out.data[0]

    def generate(self, count: int, seed: int) -> list[np.ndarray]:
        """``count`` samples from i.i.d. standard-normal latents, in draw order, unfiltered."""
        rng = np.random.default_rng(seed)
        samples = [self.decode(self.latent(rng)) for _ in range(count)]
        logger.info("samples_generated", count=count, seed=seed)
        return samples

    def interpolate(
        self,
        corner_seeds: Sequence[int],
        grid: int,
        mode: str = "bilinear",
    ) -> list[list[np.ndarray]]:
        """g x g samples between four corner latents.

        Corner ``z_ij`` is the first latent drawn from seed ``corner_seeds``
        in the order (z00, z01, z10, z11), so corners equal ``generate(1, seed)``.

        Args:
            corner_seeds: Four seeds
            grid: Grid resolution g >= 2
            mode: ``bilinear`` or ``spherical``

        Returns:
            Nested list, ``result[i][j]`` at u = i / (g - 1), v = j / (g - 1)

        Raises:
            ContractError: Wrong corner count or grid < 2
        """
        if len(corner_seeds) != 4:
            raise ContractError(f"interpolation needs 4 corner seeds, got {len(corner_seeds)}")
        if grid < 2:
            raise ContractError(f"grid resolution must be >= 2, got {grid}")
        z00, z01, z10, z11 = (self.latent(np.random.default_rng(s)) for s in corner_seeds)
        rows = []
        for i in range(grid):
            u = i / (grid - 1)
            row = []
            for j in range(grid):
                v = j / (grid - 1)
                if mode == "spherical":
                    z = slerp(slerp(z00, z10, u), slerp(z01, z11, u), v)
                else:
                    w00, w01, w10, w11 = lerp_grid_weights(u, v)
                    z = w00 * z00 + w01 * z01 + w10 * z10 + w11 * z11
                row.append(self.decode(z))
            rows.append(row)
        logger.info("latent_grid_generated", grid=grid, mode=mode)
        return rows

    def extended_latent(self, rng: np.random.Generator, extra: Triple) -> np.ndarray:
        """Base latent with ``extra`` cells per axis.

        The base latent is drawn first, so it matches :meth:`generate`; added
        cells come from the following draws. A negative ``extra`` truncates.

        Raises:
            ConfigurationError: An axis would shrink below one cell
        """
        spatial = self.generator.config.latent.spatial
        sizes = [s + e for s, e in zip(spatial, extra)]
        if any(size < 1 for size in sizes):
            raise ConfigurationError(f"latent extents {tuple(sizes)} must stay >= 1")
        base = self.latent(rng)
        if all(e <= 0 for e in extra):
            return base[:, :, : sizes[0], : sizes[1], : sizes[2]].copy()
        latent = self.latent(rng, extra)
        keep = tuple(slice(0, min(s, size)) for s, size in zip(spatial, sizes))
        latent[(slice(None), slice(None)) + keep] = base[(slice(None), slice(None)) + keep]
        return latent

    def extrapolate(self, extra: Triple, seed: int) -> Extrapolation:
        """Enlarged (or truncated) sample plus f_s on its time channel."""
        latent = self.extended_latent(np.random.default_rng(seed), extra)
        sample = self.decode(latent)
        f_s = None
        if TIME in self.channels:
            f_s = superposition_fraction(sample[self.channels.index(TIME)])
        logger.info("sample_extrapolated", extra=list(extra), shape=list(sample.shape), f_s=f_s)
        return Extrapolation(sample, latent.shape, f_s)

    def to_sample(self, data: np.ndarray) -> Sample:
        return Sample(data=data, channels=self.channels, cell_size=self.config.data.synth.cell_size)

    def save(
        self, samples: Sequence[np.ndarray], out_dir: Union[str, Path], prefix: str = "sample"
    ) -> list[Path]:
        """Write unscaled samples as FLVD files ``{prefix}_{index:05d}.flvd``."""
        out_dir = Path(out_dir)
        paths = []
        for index, data in enumerate(samples):
            volume = unscale_sample(self.to_sample(data))
            paths.append(save_volume(volume, out_dir / f"{prefix}_{index:05d}.flvd"))
        return paths
