"""Mock tests for ablation service."""

import csv

import pytest

from exceptions import ConfigurationError, NumericalAbortError
from repositories.run_repository import RunRepository
from schemas.config import RunConfig
from schemas.metrics import MetricsRecord
from services.ablation_service import TABLE_COLUMNS, AblationService
from tests.conftest import tiny_run_document


@pytest.fixture
def base() -> RunConfig:
    return RunConfig.model_validate(tiny_run_document())


@pytest.fixture
def fake_training(mocker):
    """Replace training with two metric rows per run; runs of arch0 collapse after the first."""

    def build(resolved, run_dir):
        run = RunRepository(run_dir)
        run.append_metrics(MetricsRecord(0, 0.7, 1.4, 0.5, 0.9, 0.0))
        service = mocker.Mock()
        if resolved.preset == "arch0":
            service.train.side_effect = NumericalAbortError("non-finite d_loss", {"d_loss": float("nan")})
        else:
            run.append_metrics(MetricsRecord(2, 0.6, 1.3, 0.3, 1.0, 0.1))
        return service

    return mocker.patch("services.ablation_service.TrainingService", side_effect=build)


class TestAblationJobs:
    """Test job planning."""

    def test_jobs_per_preset_and_repeat(self, base, tmp_path):
        """Test repeat r uses seed base_seed + r and its own directory."""
        jobs = AblationService(base, tmp_path).jobs(["arch0", "arch4"], repeats=2, base_seed=10)

        assert [(j.preset, j.seed) for j in jobs] == [
            ("arch0", 10),
            ("arch0", 11),
            ("arch4", 10),
            ("arch4", 11),
        ]
        assert jobs[1].run_dir == str(tmp_path / "arch0" / "seed_11")
        assert jobs[1].config["preset"] == "arch0"
        assert jobs[1].config["seed"] == 11

    def test_no_presets(self, base, tmp_path):
        """Test an empty preset list."""
        with pytest.raises(ConfigurationError):
            AblationService(base, tmp_path).jobs([], repeats=1)

    def test_no_repeats(self, base, tmp_path):
        """Test zero repeats."""
        with pytest.raises(ConfigurationError):
            AblationService(base, tmp_path).jobs(["arch4"], repeats=0)

    def test_unknown_preset_fails_before_training(self, base, tmp_path, fake_training):
        """Test configurations are resolved while planning."""
        with pytest.raises(ConfigurationError):
            AblationService(base, tmp_path).run(["arch4", "arch99"], repeats=1)

        fake_training.assert_not_called()


class TestAblationRun:
    """Test the ablation table."""

    def test_table_rows(self, base, tmp_path, fake_training):
        """Test one row per job with final and mean metrics."""
        table = AblationService(base, tmp_path).run(["arch4", "arch5"], repeats=2)

        assert list(table.columns) == list(TABLE_COLUMNS)
        assert list(table["preset"]) == ["arch4", "arch4", "arch5", "arch5"]
        assert set(table["status"]) == {"completed"}
        assert list(table["iterations"]) == [2, 2, 2, 2]
        assert table["final_d_w"].tolist() == [0.3] * 4
        assert table["mean_d_w"].iloc[0] == pytest.approx(0.4)
        assert fake_training.call_count == 4

    def test_collapsed_run_is_reported(self, base, tmp_path, fake_training):
        """Test a numerical abort becomes a collapsed row instead of an error."""
        table = AblationService(base, tmp_path).run(["arch0"], repeats=1)

        row = table.iloc[0]
        assert row["status"] == "collapsed"
        assert row["iterations"] == 0
        assert row["final_d_w"] == 0.5

    def test_csv_written(self, base, tmp_path, fake_training):
        """Test ablation.csv holds the same rows."""
        AblationService(base, tmp_path).run(["arch4"], repeats=1, base_seed=3)

        with open(tmp_path / "ablation.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert rows[0]["preset"] == "arch4"
        assert rows[0]["seed"] == "3"
        assert rows[0]["final_f_s"] == "1.0"
        assert rows[0]["run_dir"] == str(tmp_path / "arch4" / "seed_3")
