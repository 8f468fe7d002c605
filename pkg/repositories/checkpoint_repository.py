"""FGCK checkpoint container.

Layout::

    magic  b"FGCK"
    u32    version (1), little-endian
    u64    header length, little-endian
    header UTF-8 JSON with sorted keys: {"arrays": [...], "metadata": {...}}
    payload raw little-endian arrays in sorted name order

The encoding is a pure function of the state, so save -> load -> save
reproduces the same bytes.
"""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from exceptions import (
    BadMagicError,
    FormatError,
    PayloadSizeError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)
from repositories.base import BaseRepository, PathLike
from utils.logger import get_logger

logger = get_logger(__name__)

MAGIC = b"FGCK"
VERSION = 1
_PREAMBLE = struct.Struct("<4sIQ")


@dataclass
class Checkpoint:
    """Named arrays plus JSON-compatible metadata (iteration, RNG state, config)."""

    arrays: dict[str, np.ndarray]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def iteration(self) -> int:
        return int(self.metadata.get("iteration", 0))


def _little_endian(array: np.ndarray) -> np.ndarray:
    array = np.asarray(array)
    return np.ascontiguousarray(array, dtype=array.dtype.newbyteorder("<"))


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    entries = []
    payload = []
    offset = 0
    for name in sorted(checkpoint.arrays):
        array = _little_endian(checkpoint.arrays[name])
        raw = array.tobytes()
        entries.append(
            {
                "dtype": array.dtype.str,
                "name": name,
                "offset": offset,
                "shape": list(array.shape),
                "size": len(raw),
            }
        )
        payload.append(raw)
        offset += len(raw)
    header = json.dumps(
        {"arrays": entries, "metadata": checkpoint.metadata},
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    return _PREAMBLE.pack(MAGIC, VERSION, len(header)) + header + b"".join(payload)


def decode_checkpoint(data: bytes) -> Checkpoint:
    """Parse FGCK bytes.

    Raises:
        BadMagicError: Wrong magic bytes
        UnsupportedVersionError: Version other than 1
        TruncatedPayloadError: Header or payload shorter than declared
        FormatError: Header is not valid JSON or an array entry is malformed
        PayloadSizeError: Trailing bytes after the payload
    """
    if data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < _PREAMBLE.size:
        raise TruncatedPayloadError("checkpoint preamble is truncated")
    _, version, header_length = _PREAMBLE.unpack_from(data, 0)
    if version != VERSION:
        raise UnsupportedVersionError(f"checkpoint version {version} is not supported")
    start = _PREAMBLE.size + header_length
    if len(data) < start:
        raise TruncatedPayloadError("checkpoint header is truncated")
    try:
        header = json.loads(data[_PREAMBLE.size : start].decode("utf-8"))
        entries, metadata = list(header["arrays"]), header["metadata"]
    except (ValueError, KeyError, TypeError) as e:
        raise FormatError(f"checkpoint header is malformed: {e}") from e
    if not isinstance(metadata, dict):
        raise FormatError("checkpoint metadata is not an object")

    arrays = {}
    payload_size = 0
    for entry in entries:
        try:
            name, offset, size = str(entry["name"]), int(entry["offset"]), int(entry["size"])
            dtype, shape = np.dtype(entry["dtype"]), tuple(int(n) for n in entry["shape"])
        except (ValueError, KeyError, TypeError) as e:
            raise FormatError(f"checkpoint array entry is malformed: {e}") from e
        if offset < 0 or size < 0:
            raise FormatError(f"checkpoint array '{name}' has a negative offset or size")
        begin = start + offset
        end = begin + size
        if end > len(data):
            raise TruncatedPayloadError(f"checkpoint array '{name}' is truncated")
        try:
            values = np.frombuffer(data[begin:end], dtype=dtype)
            arrays[name] = values.reshape(shape).copy()
        except (ValueError, TypeError) as e:
            raise FormatError(f"checkpoint array '{name}' does not match its header: {e}") from e
        payload_size += size
    if len(data) > start + payload_size:
        raise PayloadSizeError("checkpoint has trailing bytes after the payload")
    return Checkpoint(arrays=arrays, metadata=metadata)


def save_checkpoint(checkpoint: Checkpoint, path: PathLike) -> Path:
    path = Path(path)
    written = BaseRepository(path.parent).write_bytes(path.name, encode_checkpoint(checkpoint))
    logger.info("checkpoint_saved", path=str(written), iteration=checkpoint.iteration)
    return written


def load_checkpoint(path: PathLike) -> Checkpoint:
    path = Path(path)
    checkpoint = decode_checkpoint(BaseRepository(path.parent).read_bytes(path.name))
    logger.info("checkpoint_loaded", path=str(path), iteration=checkpoint.iteration)
    return checkpoint
