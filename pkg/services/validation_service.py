from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import pandas as pd

from exceptions import ConfigurationError
from geovalid.mds import classical_mds
from geovalid.superposition import superposition_fractions
from geovalid.swd import nearest_training_sample, pairwise_swd, swd_score
from repositories.base import BaseRepository
from schemas.config import SwdSettings
from schemas.volume import TIME
from services.dataset_service import DatasetService, stack_samples
from services.sampling_service import SamplingService
from utils.exporters import CSVExporter, JSONExporter
from utils.logger import get_logger

logger = get_logger(__name__)

HIGH_FS_THRESHOLDS = (0.9, 0.99)


def summarize_fractions(fractions: Sequence[float]) -> dict[str, float]:
    """Distribution summary of per-sample superposition fractions.

    Example:
        >>> summarize_fractions([0.5, 1.0])["median"]
        0.75
    """
    series = pd.Series(np.asarray(fractions, dtype=np.float64))
    summary = {
        "count": int(series.count()),
        "min": float(series.min()),
        "median": float(series.median()),
        "mean": float(series.mean()),
        "max": float(series.max()),
    }
    for threshold in HIGH_FS_THRESHOLDS:
        summary[f"fraction_above_{threshold}"] = float((series > threshold).mean())
    return summary


@dataclass
class ValidationReport:
    d_w: float
    per_level: list[float]
    f_s_summary: Optional[dict[str, float]]
    mds: list[dict[str, Any]] = field(default_factory=list)
    nearest: list[dict[str, Any]] = field(default_factory=list)
    levels: Optional[list[int]] = None

    def level_indices(self) -> list[int]:
        """Pyramid index of each per_level entry."""
        return list(range(len(self.per_level))) if self.levels is None else self.levels

    def as_dict(self) -> dict[str, Any]:
        return {
            "d_w": self.d_w,
            "levels": self.level_indices(),
            "per_level": self.per_level,
            "f_s": self.f_s_summary,
            "mds_items": len(self.mds),
            "nearest_checked": len(self.nearest),
        }


class ValidationService:
    """Compares generated samples with a reference set."""

    def __init__(
        self,
        sampling: SamplingService,
        dataset: DatasetService,
        settings: Optional[SwdSettings] = None,
    ) -> None:
        """Initialize validation service.

        Args:
            sampling: Generator wrapper
            dataset: Source of reference and training samples
            settings: Sliced Wasserstein settings (defaults to the run's)
        """
        self.sampling = sampling
        self.dataset = dataset
        self.settings = settings or sampling.config.train.swd

    def mds_table(self, generated: np.ndarray, reference: np.ndarray, per_set: int) -> list[dict[str, Any]]:
        """MDS coordinates of pooled generated and reference items, labeled by set."""
        items = list(generated[:per_set]) + list(reference[:per_set])
        labels = ["generated"] * min(per_set, len(generated)) + ["reference"] * min(per_set, len(reference))
        if len(items) < 3:
            logger.warning("mds_skipped", items=len(items))
            return []
        coords = classical_mds(pairwise_swd(items, self.settings), k=2)
        return [
            {"index": index, "set": label, "mds_x": repr(float(x)), "mds_y": repr(float(y))}
            for index, (label, (x, y)) in enumerate(zip(labels, coords))
        ]

    def nearest_table(
        self, generated: np.ndarray, train_ids: Sequence[int], count: int
    ) -> list[dict[str, Any]]:
        """Top-1 nearest training sample of the first ``count`` generated samples."""
        training = self.dataset.reference_samples(train_ids, seed=self.sampling.config.split.seed)
        rows = []
        for index, sample in enumerate(generated[:count]):
            position, distance = nearest_training_sample(sample, [s.data for s in training], self.settings)
            rows.append(
                {
                    "index": index,
                    "nearest_realization": training[position].realization_id,
                    "nearest_offset": "x".join(str(o) for o in training[position].offset),
                    "distance": repr(float(distance)),
                }
            )
        return rows

    def validate(
        self,
        n_samples: int,
        seed: int,
        reference_ids: Sequence[int],
        mds_per_set: int = 16,
        train_ids: Optional[Sequence[int]] = None,
        n_memorization: int = 0,
    ) -> ValidationReport:
        """Generate samples and compute every validation measure.

        Args:
            n_samples: Number of generated samples
            seed: Latent seed of the generated samples
            reference_ids: Realizations of the reference set (test or validation)
            mds_per_set: Items per set entering the MDS plot
            train_ids: Training realizations for the memorization search
            n_memorization: Generated samples checked against the training set

        Returns:
            ValidationReport
        """
        if n_samples < 1:
            raise ConfigurationError("validation needs at least one generated sample")
        generated = np.stack(self.sampling.generate(n_samples, seed))
        split_seed = self.sampling.config.split.seed
        reference = stack_samples(self.dataset.reference_samples(reference_ids, seed=split_seed))
        result = swd_score(generated, reference, self.settings)

        summary = None
        channels = self.sampling.channels
        if TIME in channels:
            summary = summarize_fractions(superposition_fractions(generated, channels.index(TIME)))

        mds = self.mds_table(generated, reference, mds_per_set) if mds_per_set > 0 else []
        nearest = []
        if train_ids and n_memorization > 0:
            nearest = self.nearest_table(generated, train_ids, n_memorization)
        logger.info(
            "validation_completed",
            generated=len(generated),
            reference=len(reference),
            d_w=result.score,
            median_f_s=summary["median"] if summary else None,
        )
        return ValidationReport(result.score, result.per_level, summary, mds, nearest, result.levels)

    @staticmethod
    def write(report: ValidationReport, out_dir: Union[str, Path]) -> list[Path]:
        """Write ``report.json``, ``d_w_levels.csv``, ``mds.csv`` and ``nearest.csv``."""
        repository = BaseRepository(out_dir)
        levels = [
            {"level": level, "d_w": repr(float(d))}
            for level, d in zip(report.level_indices(), report.per_level)
        ]
        paths = [
            repository.write_bytes("report.json", JSONExporter.export_to_bytes(report.as_dict())),
            repository.write_bytes("d_w_levels.csv", CSVExporter.export_to_bytes(levels, ("level", "d_w"))),
            repository.write_bytes(
                "mds.csv", CSVExporter.export_to_bytes(report.mds, ("index", "set", "mds_x", "mds_y"))
            ),
        ]
        if report.nearest:
            paths.append(repository.write_bytes("nearest.csv", CSVExporter.export_to_bytes(report.nearest)))
        return paths
