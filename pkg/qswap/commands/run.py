"""`qswap run`: trace CSV and criteria report for one scenario."""
from __future__ import annotations

import argparse
import logging

from qswap.commands.common import add_scenario_arguments
from qswap.commands.oracle import compare_traces, load_scenario
from qswap.services.report import criteria_frame, trace_table, with_oracle, write_csv

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("run", help="evaluate a preset or config and write its traces")
    add_scenario_arguments(parser)
    parser.add_argument("--oracle", type=int, default=0, metavar="N",
                        help="also sample N draws per trace and add empirical columns")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    run = load_scenario(args)
    name = run.traces.scenario
    frame = run.traces.to_frame()
    if args.oracle:
        frame = with_oracle(frame, compare_traces(run, args.oracle, args.seed))
    write_csv(frame, args.out / f"{name}_traces.csv")
    write_csv(criteria_frame(run.criteria), args.out / f"{name}_criteria.csv")
    print(trace_table(frame))
    for c in run.criteria:
        logger.info("%s %s: %.6g vs %.6g (%s)", c.criterion, c.params.get("modes") or c.params.get("cut", ""),
                    c.value, c.threshold, c.verdict.value)
    return 0
