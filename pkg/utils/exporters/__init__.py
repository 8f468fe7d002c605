from utils.exporters.csv_exporter import CSVExporter
from utils.exporters.json_exporter import JSONExporter

__all__ = ["CSVExporter", "JSONExporter"]
