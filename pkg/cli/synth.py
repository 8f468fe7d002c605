import argparse

from cli.common import echo, load_run_config, output_dir, positive_int, report, seed_of
from services.synth_service import SynthService
from utils.logger import get_logger

logger = get_logger(__name__)

NAME = "synth"


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="Write a synthetic FLVD dataset")
    parser.add_argument("--n-volumes", type=positive_int, help="Realizations (default: data.n_volumes)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Realization ``k`` comes from seed ``--seed + k`` and the ``data.synth`` parameters."""
    data = load_run_config(args).data
    n_volumes = args.n_volumes or data.n_volumes
    seed = seed_of(args)
    out_dir = output_dir(args, "synth")
    echo(out_dir, NAME, {"n_volumes": n_volumes, "seed": seed}, data.synth)
    paths = SynthService(data.synth).write_dataset(out_dir, n_volumes, base_seed=seed)
    logger.info("cmd_synth", volumes=len(paths), out=str(out_dir))
    report(out=str(out_dir), files=len(paths))
    return 0
