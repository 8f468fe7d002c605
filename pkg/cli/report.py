import argparse
from pathlib import Path

from cli.common import echo, non_negative_int, report, seed_of
from services.report_service import ReportService

NAME = "report"


def add_parser(subparsers: argparse._SubParsersAction, parent: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(NAME, parents=[parent], help="Render slices, curves and a summary")
    parser.add_argument("run_dir", type=Path, help="Run directory written by train")
    parser.add_argument("--n-samples", type=non_negative_int, default=2, help="Samples to render")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    service = ReportService(args.run_dir)
    seed = seed_of(args)
    paths = service.render(args.n_samples, seed)
    echo(service.out_dir, NAME, {"run_dir": args.run_dir, "n_samples": args.n_samples, "seed": seed})
    report(out=str(service.out_dir), files=len(paths))
    return 0
