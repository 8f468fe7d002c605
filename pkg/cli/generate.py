import argparse
from pathlib import Path

from cli.common import echo, non_negative_int, output_dir, report, seed_of
from services.report_service import render_sample
from services.sampling_service import SamplingService
from utils.logger import get_logger

logger = get_logger(__name__)

NAME = "generate"


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="Draw samples from a checkpoint")
    parser.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint file")
    parser.add_argument("--count", type=non_negative_int, default=16, help="Number of samples")
    parser.add_argument("--png", action="store_true", help="Also render mid-slices as PNG")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Write ``count`` unscaled samples drawn in order from ``--seed``; no filtering."""
    sampling = SamplingService.from_checkpoint(args.checkpoint)
    seed = seed_of(args)
    out_dir = output_dir(args, "generated")
    echo(out_dir, NAME, {"checkpoint": args.checkpoint, "count": args.count, "seed": seed}, sampling.config)

    samples = sampling.generate(args.count, seed)
    paths = sampling.save(samples, out_dir)
    if args.png:
        for index, sample in enumerate(samples):
            render_sample(sample, sampling.channels, out_dir, f"sample_{index:05d}")
    logger.info("cmd_generate", count=args.count, seed=seed, out=str(out_dir))
    report(out=str(out_dir), files=len(paths), seed=seed)
    return 0
