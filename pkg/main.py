"""Command-line entry point."""

import argparse
import logging
import sys
from collections.abc import Sequence

from commands import SUBCOMMANDS
from core.config import settings
from core.exceptions import EXIT_USER_ERROR, handle_command_errors
from core.logging import setup_logging

logger = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the user-error code."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="gmid-dstm",
        description=(
            "Physics-informed Bayesian spatio-temporal modelling of viscous Burgers' "
            "dynamics, with classical assimilation baselines."
        ),
    )

    # -------------------------
    # Global options
    # -------------------------
    parser.add_argument("--config", help="TOML run configuration (all sections optional)")
    parser.add_argument("--seed", type=int, help="override experiment.seed")
    parser.add_argument("--out", help="override experiment.output_dir")
    parser.add_argument("--log-level", default=None, help=f"logging level (default: {settings.log_level})")
    parser.add_argument(
        "--log-format",
        choices=("simple", "detailed", "json"),
        default=None,
        help=f"log record format (default: {settings.log_format})",
    )

    # -------------------------
    # Subcommands
    # -------------------------
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for module in SUBCOMMANDS:
        module.register(subparsers)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(level=args.log_level, format_style=args.log_format)
    logger.debug("Running %s", args.command)
    return handle_command_errors(args.handler)(args)


if __name__ == "__main__":
    sys.exit(main())
