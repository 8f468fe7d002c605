import argparse

from cli.common import load_run_config, merge, output_dir, positive_int, read_config_document, report
from models.presets import preset_names
from services.training_service import TrainingService
from utils.logger import get_logger

logger = get_logger(__name__)

NAME = "train"


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="Train a model into a run directory")
    parser.add_argument("--preset", choices=preset_names(), help="Architecture preset")
    parser.add_argument("--data", choices=("synth", "flvd"), help="Data source")
    parser.add_argument("--data-path", help="FLVD directory (with --data flvd)")
    parser.add_argument("--g-iters", type=int, help="Generator iterations")
    parser.add_argument("--batch-size", type=positive_int, help="Batch size")
    parser.add_argument("--resume", action="store_true", help="Continue from the latest checkpoint")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Resolve the configuration, echo it into the run directory and train.

    Args:
        args: Parsed command line

    Returns:
        Exit code
    """
    document = read_config_document(args.config)
    merge(document, "data", {"source": args.data, "path": args.data_path})
    merge(document, "train", {"total_g_iterations": args.g_iters, "batch_size": args.batch_size})
    if args.preset is not None:
        document["preset"] = args.preset
    config = load_run_config(args, document).resolve()
    if config.out is None:
        default_dir = output_dir(args, f"{config.preset}/seed_{config.train.seed}")
        config = config.model_copy(update={"out": str(default_dir)})
    run_dir = str(config.out)
    logger.info("cmd_train", preset=config.preset, run_dir=str(run_dir), resume=args.resume)
    result = TrainingService(config, run_dir).train(resume=args.resume)
    last = result.records[-1] if result.records else None
    report(
        run_dir=str(result.run_dir),
        iterations=result.iterations,
        d_w=last.d_w if last else None,
        f_s=last.f_s if last else None,
    )
    return 0
