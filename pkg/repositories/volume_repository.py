"""FLVD voxel-volume container.

Layout, little-endian throughout::

    magic  b"FLVD"
    u32    version (1)
    u32    nx, ny, nz
    f32    dx, dy, dz (meters)
    u32    channel count
    per channel: u16 name length, UTF-8 name
    payload: channels in declared order, nx*ny*nz f32 each, x fastest

Empty cells are stored as quiet NaN.
"""

import re
import struct
from pathlib import Path
from typing import Optional

import numpy as np

from exceptions import (
    BadMagicError,
    DataError,
    FormatError,
    PayloadSizeError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)
from repositories.base import BaseRepository, PathLike
from schemas.volume import VoxelVolume
from utils.logger import get_logger

logger = get_logger(__name__)

MAGIC = b"FLVD"
VERSION = 1
_HEADER = struct.Struct("<4sI3I3fI")
_NAME_LENGTH = struct.Struct("<H")
_FLOAT = np.dtype("<f4")
_FILENAME = re.compile(r"realization_(\d+)\.flvd$")


def encode_volume(volume: VoxelVolume) -> bytes:
    """Serialize a volume to FLVD bytes."""
    volume.validate()
    nx, ny, nz = volume.dims
    parts = [_HEADER.pack(MAGIC, VERSION, nx, ny, nz, *volume.cell_size, len(volume.channels))]
    for name in volume.channels:
        encoded = name.encode("utf-8")
        parts.append(_NAME_LENGTH.pack(len(encoded)))
        parts.append(encoded)
    for values in volume.channels.values():
        parts.append(np.asarray(values, dtype=_FLOAT).ravel(order="F").tobytes())
    return b"".join(parts)


def decode_volume(data: bytes, realization_id: int = 0) -> VoxelVolume:
    """Parse FLVD bytes.

    Raises:
        BadMagicError: Wrong magic bytes
        UnsupportedVersionError: Version other than 1
        TruncatedPayloadError: Header or payload shorter than declared
        FormatError: Channel name is not valid UTF-8
        PayloadSizeError: Trailing bytes after the declared payload
    """
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < _HEADER.size:
        raise TruncatedPayloadError("FLVD header is truncated")
    _, version, nx, ny, nz, dx, dy, dz, n_channels = _HEADER.unpack_from(data, 0)
    if version != VERSION:
        raise UnsupportedVersionError(f"FLVD version {version} is not supported")

    offset = _HEADER.size
    names = []
    for _ in range(n_channels):
        if offset + _NAME_LENGTH.size > len(data):
            raise TruncatedPayloadError("FLVD channel table is truncated")
        (length,) = _NAME_LENGTH.unpack_from(data, offset)
        offset += _NAME_LENGTH.size
        if offset + length > len(data):
            raise TruncatedPayloadError("FLVD channel name is truncated")
        try:
            names.append(data[offset : offset + length].decode("utf-8"))
        except UnicodeDecodeError as e:
            raise FormatError(f"FLVD channel name is not valid UTF-8: {e}") from e
        offset += length

    cells = nx * ny * nz
    expected = offset + n_channels * cells * _FLOAT.itemsize
    if len(data) < expected:
        raise TruncatedPayloadError(
            f"FLVD payload has {len(data) - offset} bytes, header declares {expected - offset}"
        )
    if len(data) > expected:
        raise PayloadSizeError(f"FLVD payload has {len(data) - expected} trailing bytes")

    channels = {}
    for name in names:
        values = np.frombuffer(data, dtype=_FLOAT, count=cells, offset=offset)
        channels[name] = values.reshape((nx, ny, nz), order="F").astype(np.float64)
        offset += cells * _FLOAT.itemsize
    volume = VoxelVolume(
        channels=channels,
        cell_size=(float(dx), float(dy), float(dz)),
        realization_id=realization_id,
    )
    volume.validate()
    return volume


def realization_filename(realization_id: int) -> str:
    return f"realization_{realization_id:05d}.flvd"


def save_volume(volume: VoxelVolume, path: PathLike) -> Path:
    path = Path(path)
    return BaseRepository(path.parent).write_bytes(path.name, encode_volume(volume))


def load_volume(path: PathLike, realization_id: Optional[int] = None) -> VoxelVolume:
    path = Path(path)
    if realization_id is None:
        match = _FILENAME.search(path.name)
        realization_id = int(match.group(1)) if match else 0
    return decode_volume(BaseRepository(path.parent).read_bytes(path.name), realization_id)


class VolumeRepository(BaseRepository):
    """Directory of ``realization_NNNNN.flvd`` files keyed by 1-based id."""

    def save(self, volume: VoxelVolume) -> Path:
        path = self.write_bytes(realization_filename(volume.realization_id), encode_volume(volume))
        logger.debug("volume_saved", realization_id=volume.realization_id, path=str(path))
        return path

    def load(self, realization_id: int) -> VoxelVolume:
        """Load one realization.

        Raises:
            DataError: Missing file or invalid container
        """
        name = realization_filename(realization_id)
        if not self.exists(name):
            raise DataError(f"realization {realization_id} not found in {self.root}")
        volume = decode_volume(self.read_bytes(name), realization_id)
        logger.debug("volume_loaded", realization_id=realization_id, dims=volume.dims)
        return volume

    def ids(self) -> list[int]:
        """Realization ids present in the directory, ascending."""
        found = []
        for path in self.list("*.flvd"):
            match = _FILENAME.search(path.name)
            if match:
                found.append(int(match.group(1)))
        return sorted(found)
