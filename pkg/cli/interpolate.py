import argparse
from pathlib import Path

from cli.common import echo, non_negative_int, output_dir, report
from services.report_service import render_sample
from services.sampling_service import SamplingService
from utils.logger import get_logger

logger = get_logger(__name__)

NAME = "interpolate"


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="Latent grid between four corner samples")
    parser.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint file")
    parser.add_argument(
        "--corner-seeds",
        type=non_negative_int,
        nargs=4,
        required=True,
        metavar=("Z00", "Z01", "Z10", "Z11"),
        help="Seeds of the four corner latents",
    )
    parser.add_argument("--grid", type=int, default=5, help="Grid resolution (>= 2)")
    parser.add_argument("--mode", choices=("bilinear", "spherical"), default="bilinear")
    parser.add_argument("--png", action="store_true", help="Also render mid-slices as PNG")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Write the grid as ``interp_{i}_{j}.flvd``; corners equal ``generate --count 1``."""
    sampling = SamplingService.from_checkpoint(args.checkpoint)
    out_dir = output_dir(args, "interpolation")
    arguments = {
        "checkpoint": args.checkpoint,
        "corner_seeds": list(args.corner_seeds),
        "grid": args.grid,
        "mode": args.mode,
    }
    echo(out_dir, NAME, arguments, sampling.config)

    grid = sampling.interpolate(args.corner_seeds, args.grid, args.mode)
    files = 0
    for i, row in enumerate(grid):
        files += len(sampling.save(row, out_dir, prefix=f"interp_{i:03d}"))
        if args.png:
            for j, sample in enumerate(row):
                render_sample(sample, sampling.channels, out_dir, f"interp_{i:03d}_{j:05d}")
    logger.info("cmd_interpolate", grid=args.grid, mode=args.mode, out=str(out_dir))
    report(out=str(out_dir), files=files, grid=args.grid)
    return 0
