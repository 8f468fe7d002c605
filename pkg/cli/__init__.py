"""Command-line surface: one module per subcommand."""

import argparse
from typing import Optional, Sequence

from pydantic import ValidationError

from cli import ablate, extrapolate, generate, interpolate, report, synth, train, validate
from cli.common import CliParser, global_flags
from config import settings
from exceptions import EXIT_CONFIG, FluvganError
from gradcore.tensor import set_default_dtype
from utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

COMMANDS = (train, generate, validate, interpolate, extrapolate, ablate, synth, report)


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog="fluvgan", description="Anisotropic 3D GAN toolkit for fluvial deposits")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    parent = global_flags()
    for command in COMMANDS:
        command.add_parser(subparsers, parent)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run the subcommand and map failures to exit codes.

    Returns:
        0 on success, 1 for usage or configuration errors, 2 for data and
        format errors, 3 for a numerical abort
    """
    args = build_parser().parse_args(argv)
    if args.verbose:
        setup_logging("DEBUG")
    set_default_dtype(settings.precision)

    try:
        return args.handler(args)
    except FluvganError as e:
        logger.error("command_failed", command=args.command, error=str(e), error_type=type(e).__name__)
        return e.exit_code
    except ValidationError as e:
        logger.error("invalid_configuration", command=args.command, errors=e.error_count(), detail=str(e))
        return EXIT_CONFIG
    except OSError as e:
        logger.error("file_error", command=args.command, error=str(e))
        return EXIT_CONFIG


__all__ = ["COMMANDS", "build_parser", "main"]
