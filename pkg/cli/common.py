"""Helpers shared by the subcommands: global flags, config loading, echo files."""

import argparse
import json
from pathlib import Path
from typing import Any, Optional

from config import settings
from exceptions import EXIT_CONFIG, ConfigurationError
from repositories.base import BaseRepository
from schemas.config import RunConfig
from utils.exporters import JSONExporter


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the configuration code."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage()
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def non_negative_int(value: str) -> int:
    number = int(value)
    if number < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return number


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def global_flags() -> argparse.ArgumentParser:
    """Parent parser holding the flags every subcommand accepts."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="JSON document mirroring RunConfig")
    parent.add_argument("--seed", type=non_negative_int, help="Seed (overrides the config)")
    parent.add_argument("--out", type=Path, help="Output directory")
    parent.add_argument("--threads", type=positive_int, default=settings.threads, help="BLAS threads")
    parent.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    return parent


def read_config_document(path: Optional[Path]) -> dict[str, Any]:
    """Raw ``--config`` document, or an empty one.

    Raises:
        ConfigurationError: File missing, unreadable or not a JSON object
    """
    if path is None:
        return {}
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(document, dict):
        raise ConfigurationError(f"config {path} must hold a JSON object")
    return document


def merge(document: dict[str, Any], section: str, values: dict[str, Any]) -> None:
    """Set non-None ``values`` inside ``document[section]``."""
    values = {key: value for key, value in values.items() if value is not None}
    if values:
        document[section] = {**document.get(section, {}), **values}


def load_run_config(args: argparse.Namespace, document: Optional[dict[str, Any]] = None) -> RunConfig:
    """RunConfig from ``document`` (default: the ``--config`` file) with the global flags applied."""
    document = dict(read_config_document(args.config) if document is None else document)
    if args.seed is not None:
        document["seed"] = args.seed
    if args.out is not None:
        document["out"] = str(args.out)
    return RunConfig.model_validate(document)


def seed_of(args: argparse.Namespace) -> int:
    return settings.default_seed if args.seed is None else args.seed


def output_dir(args: argparse.Namespace, default: str) -> Path:
    return Path(args.out) if args.out is not None else Path(settings.runs_dir) / default


def echo(out_dir: Path, command: str, arguments: dict[str, Any], config: Optional[Any] = None) -> Path:
    """Write ``{command}.json`` with the arguments and resolved configuration of a command."""
    document: dict[str, Any] = {
        "command": command,
        "arguments": {
            key: str(value) if isinstance(value, Path) else value for key, value in arguments.items()
        },
    }
    if config is not None:
        document["config"] = config.model_dump(mode="json")
    return BaseRepository(out_dir).write_bytes(f"{command}.json", JSONExporter.export_to_bytes(document))


def report(**fields: Any) -> None:
    """Command result as one JSON line on stdout."""
    print(json.dumps(fields, sort_keys=True, default=str))
