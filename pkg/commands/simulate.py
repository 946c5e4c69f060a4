"""`simulate`: generate one synthetic realization."""

import argparse
import logging

from commands.base import load_config, output_dir
from core.exceptions import EXIT_OK
from models.simulation import simulate
from storage.artifacts import staged_output, write_truth

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "simulate",
        help="simulate the Burgers data-generating process",
        description="Writes truth.csv, obs.csv and truth.json to the output directory.",
    )
    parser.set_defaults(handler=cmd_simulate)


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args)
    truth = simulate(config)
    with staged_output(output_dir(config)) as staging:
        write_truth(staging, truth)
    return EXIT_OK
