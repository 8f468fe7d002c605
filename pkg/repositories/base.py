import os
from pathlib import Path
from typing import Union

from exceptions import ConfigurationError, DataError
from utils.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


class BaseRepository:
    """Base repository with common file operations under one root directory.

    This implements the Repository pattern for artifact access abstraction:
    services work with names, the repository owns paths and atomic writes.
    """

    def __init__(self, root: PathLike) -> None:
        """Initialize repository.

        Args:
            root: Directory holding the repository's files
        """
        self.root = Path(root)

    def path_for(self, name: PathLike) -> Path:
        """Absolute path of an entry (names may contain sub-directories)."""
        return self.root / name

    def exists(self, name: PathLike) -> bool:
        return self.path_for(name).is_file()

    def ensure_root(self) -> Path:
        """Create the root directory.

        Raises:
            ConfigurationError: Directory cannot be created
        """
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigurationError(f"cannot create directory {self.root}: {e}") from e
        return self.root

    def write_bytes(self, name: PathLike, data: bytes) -> Path:
        """Write an entry atomically (temporary file then rename).

        Args:
            name: Entry name relative to the root
            data: File content

        Returns:
            Path of the written file

        Raises:
            ConfigurationError: Target is not writable
        """
        path = self.path_for(name)
        tmp = path.with_name(path.name + ".tmp")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp.write_bytes(data)
            os.replace(tmp, path)
        except OSError as e:
            if tmp.exists():
                tmp.unlink()
            raise ConfigurationError(f"cannot write {path}: {e}") from e
        logger.debug("file_written", path=str(path), size=len(data))
        return path

    def append_bytes(self, name: PathLike, data: bytes) -> Path:
        path = self.path_for(name)
        try:
            with path.open("ab") as handle:
                handle.write(data)
        except OSError as e:
            raise ConfigurationError(f"cannot append to {path}: {e}") from e
        return path

    def read_bytes(self, name: PathLike) -> bytes:
        """Read an entry.

        Raises:
            DataError: Entry missing or unreadable
        """
        path = self.path_for(name)
        try:
            return path.read_bytes()
        except OSError as e:
            raise DataError(f"cannot read {path}: {e}") from e

    def list(self, pattern: str = "*") -> list[Path]:
        """Entries matching a glob pattern, sorted by name."""
        if not self.root.is_dir():
            return []
        return sorted(p for p in self.root.glob(pattern) if p.is_file())
