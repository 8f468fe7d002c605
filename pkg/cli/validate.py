import argparse
from pathlib import Path

from cli.common import echo, load_run_config, non_negative_int, output_dir, positive_int, report, seed_of
from services.dataset_service import DatasetService
from services.sampling_service import SamplingService
from services.validation_service import ValidationService
from utils.logger import get_logger

logger = get_logger(__name__)

NAME = "validate"


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="Validation report of a checkpoint")
    parser.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint file")
    parser.add_argument("--n-samples", type=positive_int, default=256, help="Generated samples")
    parser.add_argument("--reference", choices=("test", "val"), default="test", help="Reference split")
    parser.add_argument("--mds-per-set", type=non_negative_int, default=16, help="Items per set in the MDS")
    parser.add_argument(
        "--memorization",
        type=non_negative_int,
        default=0,
        help="Generated samples searched for their nearest training sample",
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Compare generated samples with the reference split of the data.

    The data and split sections come from ``--config`` when given,
    otherwise from the configuration stored in the checkpoint.
    """
    sampling = SamplingService.from_checkpoint(args.checkpoint)
    config = sampling.config
    if args.config is not None:
        override = load_run_config(args)
        config = config.model_copy(update={"data": override.data, "split": override.split})
    dataset = DatasetService(config.data)
    plan = dataset.split(config.split)
    reference_ids = plan.test_ids if args.reference == "test" else plan.val_ids

    seed = seed_of(args)
    out_dir = output_dir(args, "validation")
    arguments = {
        "checkpoint": args.checkpoint,
        "n_samples": args.n_samples,
        "reference": args.reference,
        "mds_per_set": args.mds_per_set,
        "memorization": args.memorization,
        "seed": seed,
    }
    echo(out_dir, NAME, arguments, config)

    validation = ValidationService(sampling, dataset)
    result = validation.validate(
        args.n_samples,
        seed,
        reference_ids,
        mds_per_set=args.mds_per_set,
        train_ids=plan.train_ids,
        n_memorization=args.memorization,
    )
    ValidationService.write(result, out_dir)
    logger.info("cmd_validate", out=str(out_dir), d_w=result.d_w)
    report(
        out=str(out_dir),
        d_w=result.d_w,
        median_f_s=result.f_s_summary["median"] if result.f_s_summary else None,
    )
    return 0
