"""Figure-style outputs of a run: slice renders, metric curves, text summary."""

from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from models.discriminator import build_discriminator  # noqa: E402
from repositories.run_repository import RunRepository  # noqa: E402
from services.sampling_service import SamplingService  # noqa: E402
from utils.logger import get_logger  # noqa: E402

logger = get_logger(__name__)

# PNG metadata without the library version, so equal arrays give equal bytes
PNG_METADATA = {"Software": None}
CURVES = (("d_w", "d_w.png"), ("f_s", "f_s.png"))


def horizontal_slice(volume: np.ndarray, z: Optional[int] = None) -> np.ndarray:
    """Map view at layer ``z`` (default middle): rows follow y, columns follow x."""
    return volume[:, :, volume.shape[2] // 2 if z is None else z].T


def vertical_slice(volume: np.ndarray, y: Optional[int] = None) -> np.ndarray:
    """Cross-section at ``y`` (default middle): columns follow x, top row is the top layer."""
    return np.flipud(volume[:, volume.shape[1] // 2 if y is None else y, :].T)


def render_png(image: np.ndarray, path: Union[str, Path]) -> Path:
    """Grayscale PNG, one pixel per cell: -1 is black and +1 is white."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    plt.imsave(path, image, cmap="gray", vmin=-1.0, vmax=1.0, format="png", metadata=PNG_METADATA)
    return path


def render_sample(sample: np.ndarray, channels: tuple[str, ...], out_dir: Path, stem: str) -> list[Path]:
    """Horizontal and vertical mid-slices of every channel of a scaled sample."""
    paths = []
    for index, name in enumerate(channels):
        paths.append(render_png(horizontal_slice(sample[index]), out_dir / f"{stem}_{name}_horizontal.png"))
        paths.append(render_png(vertical_slice(sample[index]), out_dir / f"{stem}_{name}_vertical.png"))
    return paths


def plot_curve(frame: pd.DataFrame, column: str, path: Path) -> Path:
    figure, axis = plt.subplots(figsize=(6, 4))
    axis.plot(frame["iteration"], frame[column], marker="o", color="black")
    axis.set_xlabel("generator iteration")
    axis.set_ylabel(column)
    axis.grid(True, alpha=0.3)
    figure.tight_layout()
    figure.savefig(path, format="png", dpi=80, metadata=PNG_METADATA)
    plt.close(figure)
    return path


class ReportService:
    """Renders the artifacts of one run directory."""

    def __init__(self, run_dir: Union[str, Path]) -> None:
        """Initialize report service.

        Args:
            run_dir: Run directory written by training
        """
        self.run = RunRepository(run_dir)
        self.out_dir = self.run.root / "report"

    def curves(self, frame: pd.DataFrame) -> list[Path]:
        """Metric curves; none for a run without metric rows."""
        if frame.empty:
            return []
        self.out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for column, filename in CURVES:
            if frame[column].notna().any():
                paths.append(plot_curve(frame.dropna(subset=[column]), column, self.out_dir / filename))
        return paths

    def summary(self, frame: pd.DataFrame) -> str:
        config = self.run.read_config()
        lines = [
            f"run: {self.run.root}",
            f"preset: {config.preset}",
            f"planned iterations: {config.train.total_g_iterations}",
            f"metric rows: {len(frame)}",
            f"checkpoints: {', '.join(str(i) for i in self.run.checkpoint_iterations()) or 'none'}",
        ]
        if not frame.empty:
            last = frame.iloc[-1]
            lines.append(f"last iteration: {int(last['iteration'])}")
            for column in ("g_loss", "d_loss", "d_w", "f_s"):
                if pd.notna(last[column]):
                    lines.append(f"last {column}: {float(last[column])!r}")
            lines.append(f"best d_w: {float(frame['d_w'].min())!r}")
        return "\n".join(lines) + "\n"

    def network(self, sampling: SamplingService) -> dict:
        """Layer table of both networks built from the run configuration."""
        generator = sampling.generator
        discriminator = build_discriminator(sampling.config.architecture)
        return {
            "generator": generator.describe(generator.latent_shape(1)),
            "discriminator": discriminator.describe((1,) + discriminator.input_shape),
            "parameters": {
                "generator": generator.parameter_count(),
                "discriminator": discriminator.parameter_count(),
            },
        }

    def render(self, n_samples: int = 2, seed: int = 0) -> list[Path]:
        """Write the summary, curves, network table and sample slices.

        Args:
            n_samples: Samples rendered from the latest checkpoint
            seed: Latent seed of those samples

        Returns:
            Paths of the written files

        Raises:
            DataError: The run has no metrics file
        """
        frame = self.run.metrics_frame()
        summary_path = self.run.write_bytes("report/summary.txt", self.summary(frame).encode("utf-8"))
        paths = [summary_path] + self.curves(frame)

        latest = self.run.latest_checkpoint()
        if latest is not None:
            sampling = SamplingService.from_checkpoint(latest)
            paths.append(self.run.write_json("report/network.json", self.network(sampling)))
            for index, sample in enumerate(sampling.generate(n_samples, seed)):
                paths += render_sample(sample, sampling.channels, self.out_dir, f"sample_{index:03d}")
        logger.info("report_rendered", run_dir=str(self.run.root), files=len(paths))
        return paths
