"""Mock tests for repository layer."""

import struct

import numpy as np
import pytest

from exceptions import (
    BadMagicError,
    ConfigurationError,
    DataError,
    FormatError,
    PayloadSizeError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)
from repositories.base import BaseRepository
from repositories.checkpoint_repository import (
    Checkpoint,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from repositories.run_repository import RunRepository
from repositories.volume_repository import (
    VolumeRepository,
    decode_volume,
    encode_volume,
    load_volume,
    save_volume,
)
from schemas.config import RunConfig
from schemas.metrics import MetricsRecord
from schemas.volume import VoxelVolume
from tests.conftest import tiny_run_document


@pytest.fixture
def checkpoint() -> Checkpoint:
    return Checkpoint(
        arrays={
            "G.w.data": np.arange(6, dtype=np.float64).reshape(2, 3),
            "G.w.step_count": np.array(4, dtype=np.int64),
            "D.w.data": np.linspace(-1, 1, 5).astype(np.float32),
        },
        metadata={"iteration": 7, "rng": {"state": [1, 2, 3]}},
    )


class TestBaseRepository:
    """Test common file operations."""

    def test_write_is_atomic(self, tmp_path):
        """Test the temporary file is renamed away."""
        repository = BaseRepository(tmp_path / "out")

        path = repository.write_bytes("nested/a.bin", b"abc")

        assert path.read_bytes() == b"abc"
        assert not (path.parent / "a.bin.tmp").exists()
        assert repository.exists("nested/a.bin")

    def test_unwritable_root(self, tmp_path):
        """Test a file in place of the directory is reported as configuration error."""
        blocker = tmp_path / "blocker"
        blocker.write_bytes(b"")

        with pytest.raises(ConfigurationError):
            BaseRepository(blocker).write_bytes("a.bin", b"x")

    def test_missing_entry(self, tmp_path):
        """Test reading a missing entry is a data error."""
        with pytest.raises(DataError):
            BaseRepository(tmp_path).read_bytes("absent.bin")

    def test_list_missing_directory(self, tmp_path):
        """Test listing a directory that does not exist."""
        assert BaseRepository(tmp_path / "nowhere").list() == []


class TestVolumeContainer:
    """Test the FLVD format."""

    def test_round_trip(self, layered_volume):
        """Test values, cell size and channel order survive."""
        decoded = decode_volume(encode_volume(layered_volume), realization_id=3)

        assert decoded.channel_names == ["coarse_fraction", "deposition_time"]
        assert decoded.cell_size == (50.0, 50.0, 0.5)
        assert decoded.coarse_fraction.dtype == np.float64
        np.testing.assert_allclose(decoded.coarse_fraction, layered_volume.coarse_fraction, rtol=1e-7)
        np.testing.assert_array_equal(decoded.deposition_time, layered_volume.deposition_time)

    def test_header_layout(self, layered_volume):
        """Test magic, version, dims and x-fastest payload order."""
        data = encode_volume(layered_volume)

        magic, version, nx, ny, nz = struct.unpack_from("<4sI3I", data, 0)
        assert (magic, version, (nx, ny, nz)) == (b"FLVD", 1, (6, 5, 4))
        payload_start = 36 + 2 + len("coarse_fraction") + 2 + len("deposition_time")
        first = np.frombuffer(data, dtype="<f4", count=2, offset=payload_start)
        np.testing.assert_allclose(first, [0.0, 0.2], rtol=1e-7)
        assert len(data) == payload_start + 2 * 6 * 5 * 4 * 4

    def test_empty_cells_stay_nan(self, layered_volume):
        """Test NaN marks air above topography after decoding."""
        channels = {name: values.copy() for name, values in layered_volume.channels.items()}
        for values in channels.values():
            values[0, 0, 3] = np.nan

        decoded = decode_volume(encode_volume(layered_volume.with_channels(channels)))

        assert np.isnan(decoded.deposition_time[0, 0, 3])
        assert decoded.empty_mask().sum() == 1

    def test_bad_magic(self, layered_volume):
        """Test foreign files are refused."""
        with pytest.raises(BadMagicError):
            decode_volume(b"XXXX" + encode_volume(layered_volume)[4:])

    def test_unsupported_version(self, layered_volume):
        """Test version 2 containers are refused."""
        data = bytearray(encode_volume(layered_volume))
        data[4:8] = struct.pack("<I", 2)

        with pytest.raises(UnsupportedVersionError):
            decode_volume(bytes(data))

    def test_truncated_payload(self, layered_volume):
        """Test a short payload."""
        with pytest.raises(TruncatedPayloadError):
            decode_volume(encode_volume(layered_volume)[:-1])

    def test_trailing_bytes(self, layered_volume):
        """Test a long payload."""
        with pytest.raises(PayloadSizeError):
            decode_volume(encode_volume(layered_volume) + b"\x00")

    def test_invalid_channel_name(self, layered_volume):
        """Test a channel name that is not UTF-8 raises a format error."""
        data = bytearray(encode_volume(layered_volume))
        data[38] = 0xFF

        with pytest.raises(FormatError) as excinfo:
            decode_volume(bytes(data))

        assert excinfo.value.exit_code == 2

    def test_format_errors_are_data_errors(self):
        """Test every container error maps to the data exit code."""
        with pytest.raises(DataError) as excinfo:
            decode_volume(b"")

        assert excinfo.value.exit_code == 2

    def test_invalid_volume_not_written(self, layered_volume):
        """Test coarse fractions above 1 cannot be encoded."""
        channels = {**layered_volume.channels, "coarse_fraction": layered_volume.coarse_fraction + 1.0}

        with pytest.raises(DataError):
            encode_volume(VoxelVolume(channels=channels))


class TestVolumeRepository:
    """Test the realization directory."""

    def test_save_and_load(self, tmp_path, layered_volume):
        """Test files are keyed by zero-padded realization id."""
        repository = VolumeRepository(tmp_path)

        path = repository.save(layered_volume)
        loaded = repository.load(3)

        assert path.name == "realization_00003.flvd"
        assert loaded.realization_id == 3
        assert loaded.dims == layered_volume.dims

    def test_ids_ignore_other_files(self, tmp_path, layered_volume):
        """Test ids come from matching file names only."""
        repository = VolumeRepository(tmp_path)
        for realization_id in (12, 2):
            volume = layered_volume.with_channels(layered_volume.channels, realization_id=realization_id)
            repository.save(volume)
        (tmp_path / "notes.flvd").write_bytes(b"")

        assert repository.ids() == [2, 12]

    def test_missing_realization(self, tmp_path):
        """Test loading an absent id."""
        with pytest.raises(DataError):
            VolumeRepository(tmp_path).load(1)

    def test_path_helpers_parse_id(self, tmp_path, layered_volume):
        """Test load_volume recovers the id from the file name."""
        path = save_volume(layered_volume, tmp_path / "realization_00042.flvd")

        assert load_volume(path).realization_id == 42
        assert load_volume(path, realization_id=5).realization_id == 5


class TestCheckpointContainer:
    """Test the FGCK format."""

    def test_round_trip(self, checkpoint):
        """Test arrays keep dtype, shape and values."""
        decoded = decode_checkpoint(encode_checkpoint(checkpoint))

        assert decoded.iteration == 7
        assert decoded.metadata == checkpoint.metadata
        for name, array in checkpoint.arrays.items():
            assert decoded.arrays[name].dtype == array.dtype
            np.testing.assert_array_equal(decoded.arrays[name], array)

    def test_encoding_is_stable(self, checkpoint):
        """Test save -> load -> save reproduces the same bytes."""
        data = encode_checkpoint(checkpoint)

        assert encode_checkpoint(decode_checkpoint(data)) == data

    def test_bad_magic(self, checkpoint):
        """Test foreign files are refused."""
        with pytest.raises(BadMagicError):
            decode_checkpoint(b"FLVD" + encode_checkpoint(checkpoint)[4:])

    def test_unsupported_version(self, checkpoint):
        """Test version 9 is refused."""
        data = bytearray(encode_checkpoint(checkpoint))
        data[4:8] = struct.pack("<I", 9)

        with pytest.raises(UnsupportedVersionError):
            decode_checkpoint(bytes(data))

    def test_truncated(self, checkpoint):
        """Test a checkpoint cut inside the payload."""
        with pytest.raises(TruncatedPayloadError):
            decode_checkpoint(encode_checkpoint(checkpoint)[:-3])

    def test_trailing_bytes(self, checkpoint):
        """Test bytes after the payload."""
        with pytest.raises(PayloadSizeError):
            decode_checkpoint(encode_checkpoint(checkpoint) + b"\x01")

    def test_malformed_header(self, checkpoint):
        """Test a header that is not JSON raises a format error."""
        data = bytearray(encode_checkpoint(checkpoint))
        data[16] = ord("!")

        with pytest.raises(FormatError) as excinfo:
            decode_checkpoint(bytes(data))

        assert excinfo.value.exit_code == 2

    def test_unknown_dtype(self, checkpoint):
        """Test an array entry with an unknown dtype raises a format error."""
        data = encode_checkpoint(checkpoint)
        patched = data.replace(b'"dtype":"<f8"', b'"dtype":"<q9"', 1)

        with pytest.raises(FormatError):
            decode_checkpoint(patched)

    def test_shape_mismatch(self, checkpoint):
        """Test a shape that disagrees with the byte size raises a format error."""
        data = encode_checkpoint(checkpoint)
        patched = data.replace(b'"shape":[2,3]', b'"shape":[4,3]', 1)

        with pytest.raises(FormatError):
            decode_checkpoint(patched)

    def test_file_helpers(self, tmp_path, checkpoint):
        """Test saving and loading through paths."""
        path = save_checkpoint(checkpoint, tmp_path / "ckpt" / "a.ckpt")

        assert load_checkpoint(path).iteration == 7


class TestRunRepository:
    """Test run directory layout."""

    def test_config_round_trip(self, tmp_path):
        """Test config.json reloads into the same resolved configuration."""
        resolved = RunConfig.model_validate(tiny_run_document()).resolve()
        run = RunRepository(tmp_path)

        run.write_config(resolved)

        assert run.read_config() == resolved

    def test_metrics_rows(self, tmp_path):
        """Test appended rows read back as records and as a frame."""
        run = RunRepository(tmp_path)
        run.init_metrics()
        run.append_metrics(MetricsRecord(0, 0.7, 1.4, 0.9, 0.5, 0.1))
        run.append_metrics(MetricsRecord(10, 0.6, 1.3, 0.8, None, 0.2))

        records = run.read_metrics()
        frame = run.metrics_frame()

        assert [r.iteration for r in records] == [0, 10]
        assert records[1].f_s is None
        assert list(frame.columns) == ["iteration", "g_loss", "d_loss", "d_w", "f_s", "wall_time_s"]
        assert np.isnan(frame["f_s"].iloc[1])

    def test_append_creates_header(self, tmp_path):
        """Test the first append writes the header."""
        run = RunRepository(tmp_path)

        run.append_metrics(MetricsRecord(0, 1.0, 1.0, 1.0, 1.0, 0.0))

        assert (tmp_path / "metrics.csv").read_text().startswith("iteration,g_loss")

    def test_truncate_metrics(self, tmp_path):
        """Test rows after the resume point are dropped."""
        run = RunRepository(tmp_path)
        for iteration in (0, 5, 10):
            run.append_metrics(MetricsRecord(iteration, 1.0, 1.0, 1.0, 1.0, 0.0))

        run.truncate_metrics(5)

        assert [r.iteration for r in run.read_metrics()] == [0, 5]

    def test_missing_metrics(self, tmp_path):
        """Test reading metrics of an empty directory."""
        with pytest.raises(DataError):
            RunRepository(tmp_path).read_metrics()

    def test_checkpoint_ordering(self, tmp_path, checkpoint):
        """Test iterations sort numerically and the latest one is found."""
        run = RunRepository(tmp_path)
        assert run.latest_checkpoint() is None
        for iteration in (9, 10, 2):
            run.save_checkpoint(Checkpoint(checkpoint.arrays, {"iteration": iteration}))

        assert run.checkpoint_iterations() == [2, 9, 10]
        assert run.latest_checkpoint().name == "iter_10.ckpt"
        assert run.load_checkpoint(9).iteration == 9
