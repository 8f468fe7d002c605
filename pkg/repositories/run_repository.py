import csv
import json
import re
from io import StringIO
from pathlib import Path
from typing import Any, Optional

import pandas as pd

from exceptions import DataError
from repositories.base import BaseRepository
from repositories.checkpoint_repository import (
    Checkpoint,
    decode_checkpoint,
    encode_checkpoint,
)
from schemas.config import ResolvedRunConfig
from schemas.metrics import METRICS_COLUMNS, MetricsRecord
from utils.exporters import CSVExporter, JSONExporter
from utils.logger import get_logger

logger = get_logger(__name__)

CONFIG_FILE = "config.json"
METRICS_FILE = "metrics.csv"
CHECKPOINT_DIR = "checkpoints"
_CHECKPOINT_NAME = re.compile(r"iter_(\d+)\.ckpt$")


class RunRepository(BaseRepository):
    """Run directory: ``config.json``, ``metrics.csv`` and ``checkpoints/iter_{N}.ckpt``."""

    # Configuration

    def write_config(self, config: ResolvedRunConfig) -> Path:
        """Echo the fully resolved configuration.

        Args:
            config: Resolved run configuration

        Returns:
            Path of ``config.json``
        """
        return self.write_bytes(CONFIG_FILE, JSONExporter.export_to_bytes(config.model_dump(mode="json")))

    def read_config(self) -> ResolvedRunConfig:
        """Load ``config.json``.

        Raises:
            DataError: Missing or unreadable file
        """
        data = json.loads(self.read_bytes(CONFIG_FILE).decode("utf-8"))
        return ResolvedRunConfig.model_validate(data)

    def write_json(self, name: str, data: Any) -> Path:
        return self.write_bytes(name, JSONExporter.export_to_bytes(data))

    # Metrics

    def init_metrics(self) -> Path:
        """Create ``metrics.csv`` holding only the header."""
        return self.write_bytes(METRICS_FILE, CSVExporter.export_to_bytes([], METRICS_COLUMNS))

    def append_metrics(self, record: MetricsRecord) -> None:
        if not self.exists(METRICS_FILE):
            self.init_metrics()
        row = CSVExporter.export([record.as_row()], METRICS_COLUMNS, include_header=False)
        self.append_bytes(METRICS_FILE, row.encode("utf-8"))
        logger.debug("metrics_appended", iteration=record.iteration)

    def read_metrics(self) -> list[MetricsRecord]:
        """Parse ``metrics.csv`` into records.

        Raises:
            DataError: Missing metrics file
        """
        if not self.exists(METRICS_FILE):
            raise DataError(f"no {METRICS_FILE} in {self.root}")
        text = self.read_bytes(METRICS_FILE).decode("utf-8")
        return [MetricsRecord.from_row(row) for row in csv.DictReader(StringIO(text))]

    def metrics_frame(self) -> pd.DataFrame:
        """Metrics as a DataFrame (empty f_s becomes NaN)."""
        if not self.exists(METRICS_FILE):
            raise DataError(f"no {METRICS_FILE} in {self.root}")
        return pd.read_csv(self.path_for(METRICS_FILE))

    def truncate_metrics(self, last_iteration: int) -> None:
        """Drop rows after ``last_iteration`` (used when resuming)."""
        kept = [r.as_row() for r in self.read_metrics() if r.iteration <= last_iteration]
        self.write_bytes(METRICS_FILE, CSVExporter.export_to_bytes(kept, METRICS_COLUMNS))

    # Checkpoints

    @staticmethod
    def checkpoint_name(iteration: int) -> str:
        return f"{CHECKPOINT_DIR}/iter_{iteration}.ckpt"

    def save_checkpoint(self, checkpoint: Checkpoint) -> Path:
        path = self.write_bytes(self.checkpoint_name(checkpoint.iteration), encode_checkpoint(checkpoint))
        logger.info("checkpoint_saved", path=str(path), iteration=checkpoint.iteration)
        return path

    def load_checkpoint(self, iteration: int) -> Checkpoint:
        return decode_checkpoint(self.read_bytes(self.checkpoint_name(iteration)))

    def checkpoint_iterations(self) -> list[int]:
        found = []
        for path in self.list(f"{CHECKPOINT_DIR}/*.ckpt"):
            match = _CHECKPOINT_NAME.search(path.name)
            if match:
                found.append(int(match.group(1)))
        return sorted(found)

    def latest_checkpoint(self) -> Optional[Path]:
        iterations = self.checkpoint_iterations()
        return self.path_for(self.checkpoint_name(iterations[-1])) if iterations else None
