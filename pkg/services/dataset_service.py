from collections import OrderedDict
from typing import Optional, Sequence

import numpy as np

from exceptions import DataError
from repositories.volume_repository import VolumeRepository
from schemas.config import DataConfig, SplitConfig
from schemas.volume import Sample, SplitPlan, VoxelVolume
from services.preprocessing_service import (
    crop_sample,
    extremity_offsets,
    make_split,
    prepare_volume,
    scale_sample,
)
from services.synth_service import SynthService
from utils.logger import get_logger

logger = get_logger(__name__)


class DatasetService:
    """Realizations by id, preprocessed on first use and kept in an LRU cache.

    Synthetic realization ``k`` is generated from seed ``k``, so an FLVD
    directory written by ``synth --seed 0`` holds the same volumes.
    """

    def __init__(self, config: DataConfig) -> None:
        """Initialize dataset service.

        Args:
            config: Data configuration
        """
        self.config = config
        self._cache: OrderedDict[int, VoxelVolume] = OrderedDict()
        self._repository = VolumeRepository(config.path) if config.source == "flvd" else None
        self._synth = SynthService(config.synth)

    @property
    def n_total(self) -> int:
        if self._repository is not None:
            return len(self._repository.ids())
        return self.config.n_volumes

    def volume(self, realization_id: int) -> VoxelVolume:
        """Preprocessed realization (window, fill, facies).

        At most ``config.cache_size`` volumes stay cached; the least recently
        used one is dropped first.
        """
        cached = self._cache.get(realization_id)
        if cached is not None:
            self._cache.move_to_end(realization_id)
            return cached
        if self._repository is not None:
            raw = self._repository.load(realization_id)
        else:
            raw = self._synth.realization(realization_id)
        volume = prepare_volume(raw, self.config)
        self._cache[realization_id] = volume
        if len(self._cache) > self.config.cache_size:
            evicted, _ = self._cache.popitem(last=False)
            logger.debug("volume_evicted", realization_id=evicted, cache_size=self.config.cache_size)
        return volume

    def split(self, config: SplitConfig) -> SplitPlan:
        plan = make_split(self.n_total, config.n_train, config.n_val, config.n_test, config.mode, config.seed)
        if self.config.train_limit is not None:
            plan.train_ids = plan.train_ids[: self.config.train_limit]
        logger.info(
            "dataset_split",
            train=len(plan.train_ids),
            val=len(plan.val_ids),
            test=len(plan.test_ids),
            mode=plan.mode,
        )
        return plan

    def _time_range(self, volume: VoxelVolume) -> Optional[tuple[float, float]]:
        if self.config.time_scaling != "realization" or volume.deposition_time is None:
            return None
        return float(volume.deposition_time.min()), float(volume.deposition_time.max())

    def sample(
        self,
        realization_id: int,
        rng: Optional[np.random.Generator] = None,
        offset: Optional[Sequence[int]] = None,
    ) -> Sample:
        """One scaled sample; random crop with ``rng`` or fixed crop at ``offset``."""
        volume = self.volume(realization_id)
        if offset is None and (rng is None or self.config.crop_mode == "fixed"):
            offset = self.config.fixed_offset
        crop = crop_sample(
            volume,
            self.config.sample_size,
            rng=rng,
            offset=offset,
            must_contain_channel=self.config.must_contain_channel,
            threshold=self.config.channel_threshold,
            max_retries=self.config.max_retries,
        )
        return scale_sample(crop, self.config.channels, self._time_range(volume))

    def reference_samples(self, ids: Sequence[int], seed: int = 0) -> list[Sample]:
        """Fixed evaluation samples of a set of realizations.

        ``random`` reference sampling takes one crop per realization from a
        per-id seed; ``extremity`` takes two, at the minimal and maximal y.
        """
        samples = []
        for realization_id in ids:
            if self.config.reference_sampling == "extremity":
                dims = self.volume(realization_id).dims
                z_offset = self.config.fixed_offset[2]
                for offset in extremity_offsets(dims, self.config.sample_size, z_offset):
                    samples.append(self.sample(realization_id, offset=offset))
            else:
                rng = np.random.default_rng([seed, realization_id])
                samples.append(self.sample(realization_id, rng=rng))
        return samples


class SampleSource:
    """Training batches drawn from a fixed list of realization ids."""

    def __init__(self, dataset: DatasetService, ids: Sequence[int]) -> None:
        if not ids:
            raise DataError("sample source needs at least one realization")
        self.dataset = dataset
        self.ids = list(ids)

    def batch(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Array [size, C, X, Y, Z] of uniformly drawn realizations and crops."""
        picks = rng.integers(0, len(self.ids), size=size)
        return np.stack([self.dataset.sample(self.ids[i], rng=rng).data for i in picks])


def stack_samples(samples: Sequence[Sample]) -> np.ndarray:
    if not samples:
        raise DataError("no samples to stack")
    return np.stack([s.data for s in samples])
