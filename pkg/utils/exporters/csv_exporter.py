import csv
from io import StringIO
from typing import Any, Optional, Sequence

from utils.logger import get_logger

logger = get_logger(__name__)


class CSVExporter:
    """Exporter for metric tables to CSV format (``\\n`` line endings)."""

    @staticmethod
    def export(
        rows: list[dict[str, Any]],
        fieldnames: Optional[Sequence[str]] = None,
        include_header: bool = True,
    ) -> str:
        """Export rows to a CSV string.

        Args:
            rows: List of row dictionaries
            fieldnames: Column order; defaults to the keys of the first row
            include_header: Write the header line (off when appending)

        Returns:
            CSV string; header only when ``rows`` is empty and ``fieldnames`` is given

        Example:
            >>> rows = [{"iteration": 0, "d_w": 0.5}]
            >>> csv_string = CSVExporter.export(rows)
        """
        if not rows and not fieldnames:
            logger.warning("csv_export_empty_data")
            return ""

        output = StringIO()
        writer = csv.DictWriter(
            output, fieldnames=list(fieldnames or rows[0].keys()), lineterminator="\n"
        )
        if include_header:
            writer.writeheader()
        for row in rows:
            writer.writerow(row)

        csv_string = output.getvalue()
        output.close()

        logger.debug("csv_export_completed", rows=len(rows))
        return csv_string

    @staticmethod
    def export_to_bytes(
        rows: list[dict[str, Any]], fieldnames: Optional[Sequence[str]] = None
    ) -> bytes:
        """Export rows to UTF-8 CSV bytes."""
        return CSVExporter.export(rows, fieldnames).encode("utf-8")
