import os
import sys

THREAD_VARIABLES = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def thread_count(argv: list[str]) -> str:
    """Value of ``--threads`` (or FLUVGAN_THREADS, default 1) without importing numpy."""
    for index, token in enumerate(argv):
        if token == "--threads" and index + 1 < len(argv):
            return argv[index + 1]
        if token.startswith("--threads="):
            return token.split("=", 1)[1]
    return os.environ.get("FLUVGAN_THREADS", "1")


def main() -> int:
    """Main application entry point."""
    # BLAS reads these once, when numpy is first imported
    threads = thread_count(sys.argv[1:])
    for variable in THREAD_VARIABLES:
        os.environ[variable] = threads

    from cli import main as cli_main

    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
