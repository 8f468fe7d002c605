import argparse

from cli.common import (
    echo,
    load_run_config,
    merge,
    output_dir,
    positive_int,
    read_config_document,
    report,
    seed_of,
)
from models.presets import preset_names
from services.ablation_service import AblationService
from utils.logger import get_logger

logger = get_logger(__name__)

NAME = "ablate"


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="Train several presets and compare them")
    parser.add_argument(
        "--presets", nargs="+", choices=preset_names(), required=True, help="Presets to compare"
    )
    parser.add_argument("--repeats", type=positive_int, default=3, help="Models per preset")
    parser.add_argument("--jobs", type=positive_int, default=1, help="Parallel worker processes")
    parser.add_argument("--g-iters", type=int, help="Generator iterations per model")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Write one run directory per (preset, seed) and ``ablation.csv``."""
    document = read_config_document(args.config)
    merge(document, "train", {"total_g_iterations": args.g_iters})
    out_dir = output_dir(args, "ablation")
    base = load_run_config(args, document)
    seed = seed_of(args)
    arguments = {"presets": list(args.presets), "repeats": args.repeats, "jobs": args.jobs, "seed": seed}
    echo(out_dir, NAME, arguments, base)

    table = AblationService(base, out_dir).run(args.presets, args.repeats, seed, args.jobs)
    logger.info("cmd_ablate", rows=len(table), out=str(out_dir))
    report(out=str(out_dir), rows=len(table), collapsed=int((table["status"] == "collapsed").sum()))
    return 0
