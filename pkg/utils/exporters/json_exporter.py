import json
from typing import Any

import numpy as np

from utils.logger import get_logger

logger = get_logger(__name__)


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


class JSONExporter:
    """Exporter for reports and configurations to JSON format.

    Keys are sorted so that equal inputs always give equal bytes.
    """

    @staticmethod
    def export(data: Any, indent: int = 2) -> str:
        """Export data to a JSON string.

        Args:
            data: JSON-compatible structure; numpy scalars and arrays are converted
            indent: JSON indentation level

        Returns:
            JSON string terminated by a newline

        Example:
            >>> JSONExporter.export({"d_w": 0.25, "iteration": 100})
            '{\\n  "d_w": 0.25,\\n  "iteration": 100\\n}\\n'
        """
        try:
            json_string = json.dumps(
                data, indent=indent, sort_keys=True, ensure_ascii=False, default=_to_builtin
            )
        except (TypeError, ValueError) as e:
            logger.error("json_export_failed", error=str(e))
            raise
        logger.debug("json_export_completed", size=len(json_string))
        return json_string + "\n"

    @staticmethod
    def export_to_bytes(data: Any, indent: int = 2) -> bytes:
        """Export data to UTF-8 JSON bytes."""
        return JSONExporter.export(data, indent=indent).encode("utf-8")
