import argparse
from pathlib import Path

from cli.common import echo, output_dir, report, seed_of
from repositories.base import BaseRepository
from services.report_service import render_sample
from services.sampling_service import SamplingService
from utils.exporters import JSONExporter
from utils.logger import get_logger

logger = get_logger(__name__)

NAME = "extrapolate"


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="Larger (or smaller) sample from one latent")
    parser.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint file")
    parser.add_argument(
        "--extra",
        type=int,
        nargs=3,
        default=(0, 0, 0),
        metavar=("DX", "DY", "DZ"),
        help="Latent cells added per axis; negative values truncate",
    )
    parser.add_argument("--png", action="store_true", help="Also render mid-slices as PNG")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Write the enlarged sample and ``extrapolation.json`` with its f_s."""
    sampling = SamplingService.from_checkpoint(args.checkpoint)
    seed = seed_of(args)
    extra = tuple(args.extra)
    out_dir = output_dir(args, "extrapolation")
    echo(out_dir, NAME, {"checkpoint": args.checkpoint, "extra": list(extra), "seed": seed}, sampling.config)

    result = sampling.extrapolate(extra, seed)  # type: ignore[arg-type]
    sampling.save([result.sample], out_dir, prefix="extrapolated")
    if args.png:
        render_sample(result.sample, sampling.channels, out_dir, "extrapolated")
    summary = {
        "extra": list(extra),
        "f_s": result.f_s,
        "latent_shape": list(result.latent_shape),
        "sample_shape": list(result.sample.shape),
        "seed": seed,
    }
    BaseRepository(out_dir).write_bytes("extrapolation.json", JSONExporter.export_to_bytes(summary))
    logger.info("cmd_extrapolate", **summary)
    report(out=str(out_dir), **summary)
    return 0
