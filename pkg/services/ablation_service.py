from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import pandas as pd

from exceptions import ConfigurationError, NumericalAbortError
from repositories.run_repository import RunRepository
from schemas.config import RunConfig
from services.training_service import TrainingService
from utils.exporters import CSVExporter
from utils.logger import get_logger

logger = get_logger(__name__)

TABLE_COLUMNS = (
    "preset",
    "repeat",
    "seed",
    "status",
    "iterations",
    "final_d_w",
    "mean_d_w",
    "final_f_s",
    "mean_f_s",
    "run_dir",
)


@dataclass(frozen=True)
class AblationJob:
    preset: str
    repeat: int
    seed: int
    run_dir: str
    config: dict[str, Any]


def _mean_or_none(values: list[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def run_job(job: AblationJob) -> dict[str, Any]:
    """Train one preset/seed pair; a numerical abort is reported as ``collapsed``."""
    resolved = RunConfig.model_validate(job.config).resolve()
    status = "completed"
    try:
        TrainingService(resolved, job.run_dir).train()
    except NumericalAbortError as e:
        status = "collapsed"
        logger.warning("ablation_run_collapsed", preset=job.preset, seed=job.seed, reason=str(e))

    records = RunRepository(job.run_dir).read_metrics()
    d_w = [r.d_w for r in records]
    f_s = [r.f_s for r in records if r.f_s is not None]
    return {
        "preset": job.preset,
        "repeat": job.repeat,
        "seed": job.seed,
        "status": status,
        "iterations": records[-1].iteration if records else 0,
        "final_d_w": d_w[-1] if d_w else None,
        "mean_d_w": _mean_or_none(d_w),
        "final_f_s": f_s[-1] if f_s else None,
        "mean_f_s": _mean_or_none(f_s),
        "run_dir": job.run_dir,
    }


class AblationService:
    """Trains every preset several times and tabulates the outcome."""

    def __init__(self, base: RunConfig, out_dir: Union[str, Path]) -> None:
        """Initialize ablation service.

        Args:
            base: Shared run configuration; its preset is replaced per job
            out_dir: Parent directory of the per-run directories
        """
        self.base = base
        self.out_dir = Path(out_dir)

    def jobs(self, presets: Sequence[str], repeats: int, base_seed: int = 0) -> list[AblationJob]:
        """One job per (preset, repeat); repeat r uses seed ``base_seed + r``.

        Raises:
            ConfigurationError: No preset or repeats < 1
        """
        if not presets:
            raise ConfigurationError("ablation needs at least one preset")
        if repeats < 1:
            raise ConfigurationError("repeats must be >= 1")
        jobs = []
        for preset in presets:
            for repeat in range(repeats):
                seed = base_seed + repeat
                run_dir = self.out_dir / preset / f"seed_{seed}"
                config = self.base.model_copy(update={"preset": preset, "seed": seed, "out": str(run_dir)})
                config.resolve()
                jobs.append(AblationJob(preset, repeat, seed, str(run_dir), config.model_dump(mode="json")))
        return jobs

    def run(self, presets: Sequence[str], repeats: int, base_seed: int = 0, workers: int = 1) -> pd.DataFrame:
        """Run all jobs (in a process pool when ``workers`` > 1) and write ``ablation.csv``.

        Returns:
            Table with one row per job, in (preset, repeat) order
        """
        jobs = self.jobs(presets, repeats, base_seed)
        logger.info("ablation_started", presets=list(presets), repeats=repeats, workers=workers)
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(run_job, jobs))
        else:
            rows = [run_job(job) for job in jobs]

        table = pd.DataFrame(rows, columns=list(TABLE_COLUMNS))
        RunRepository(self.out_dir).write_bytes(
            "ablation.csv",
            CSVExporter.export_to_bytes([_format_row(row) for row in rows], TABLE_COLUMNS),
        )
        final_d_w = pd.to_numeric(table["final_d_w"], errors="coerce")
        summary = final_d_w.groupby(table["preset"], sort=False).mean()
        logger.info("ablation_completed", rows=len(table), mean_final_d_w=summary.to_dict())
        return table


def _format_row(row: dict[str, Any]) -> dict[str, str]:
    formatted = {}
    for key, value in row.items():
        if value is None:
            formatted[key] = ""
        elif isinstance(value, float):
            formatted[key] = repr(value)
        else:
            formatted[key] = str(value)
    return formatted
