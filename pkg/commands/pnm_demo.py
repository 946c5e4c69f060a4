"""`pnm-demo`: GP collocation solution of -u'' = f on [0, 1]."""

import argparse
import logging

from commands.base import load_config, output_dir
from core.exceptions import EXIT_OK
from numerics.pnm import poisson_demo
from storage.artifacts import staged_output, write_json, write_table_csv

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "pnm-demo",
        help="probabilistic-numerics Poisson demonstration",
        description="Writes pnm_posterior.csv (s,mean,std) and pnm_summary.json to the output directory.",
    )
    parser.set_defaults(handler=cmd_pnm_demo)


def cmd_pnm_demo(args: argparse.Namespace) -> int:
    config = load_config(args)
    posterior, report = poisson_demo(config.pnm)
    with staged_output(output_dir(config)) as staging:
        write_table_csv(
            staging / "pnm_posterior.csv",
            {"s": posterior.query, "mean": posterior.mean, "std": posterior.std},
        )
        write_json(staging / "pnm_summary.json", report)
    if not report.consistent:
        logger.warning("Posterior operator image deviates from the forcing by more than 3 std devs")
    return EXIT_OK
