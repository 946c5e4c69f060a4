"""`summarize`: posterior means, intervals and coverage of the scalar parameters."""

import argparse
import logging
import re

import numpy as np

from commands.base import input_path, load_config, output_dir
from core.exceptions import EXIT_OK, DataFileError
from numerics.diagnostics import summarize_draws
from storage.artifacts import (
    DRAWS_CSV,
    SUMMARY_JSON,
    read_draws_csv,
    read_truth_parameters,
    staged_output,
    write_json,
    write_table_csv,
)

logger = logging.getLogger(__name__)

COVERAGE_CSV = "coverage.csv"
_WEIGHT_COLUMN = re.compile(r"^w\d+$")


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "summarize",
        help="summarize posterior draws",
        description="Writes summary.json and coverage.csv to the output directory.",
    )
    parser.add_argument("--draws", help="draws CSV (default: <out>/draws.csv)")
    parser.add_argument("--truth", help="truth.json with generative parameter values")
    parser.set_defaults(handler=cmd_summarize)


def cmd_summarize(args: argparse.Namespace) -> int:
    config = load_config(args)
    draws_path = input_path(args.draws, config, DRAWS_CSV)
    frame = read_draws_csv(draws_path)
    names = [c for c in frame.columns if c not in ("chain", "draw") and not _WEIGHT_COLUMN.match(c)]
    if not names:
        raise DataFileError(draws_path, "no parameter columns")

    truth = read_truth_parameters(args.truth) if args.truth else None
    report = summarize_draws(
        {name: frame[name].to_numpy(dtype=float) for name in names},
        truth=truth,
        chain_ids=frame["chain"].to_numpy(),
    )

    table = {
        "parameter": np.array([p.name for p in report.parameters]),
        "mean": np.array([p.mean for p in report.parameters]),
        "std": np.array([p.std for p in report.parameters]),
        "lower": np.array([p.lower for p in report.parameters]),
        "upper": np.array([p.upper for p in report.parameters]),
    }
    if truth is not None:
        table["truth"] = np.array([np.nan if p.truth is None else p.truth for p in report.parameters])
        table["covered"] = np.array(["" if p.covered is None else str(p.covered).lower() for p in report.parameters])

    with staged_output(output_dir(config)) as staging:
        write_json(staging / SUMMARY_JSON, report)
        write_table_csv(staging / COVERAGE_CSV, table)

    if report.all_covered is False:
        missed = [p.name for p in report.parameters if p.covered is False]
        logger.warning("95%% intervals miss the truth for %s", ", ".join(missed))
    return EXIT_OK
