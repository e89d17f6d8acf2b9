"""`qswap oracle`: re-measure every trace of a scenario by sampling."""
from __future__ import annotations

import argparse
import logging

import pandas as pd

from qswap.commands.common import add_scenario_arguments, apply_overrides, load_config, manifest_from_args
from qswap.services.oracle import OracleComparison, compare
from qswap.services.report import write_csv
from qswap.services.scenarios import ScenarioRun, run_experiment, run_preset

logger = logging.getLogger(__name__)

AGREEMENT_SIGMAS = 4.0


def register(subparsers):
    parser = subparsers.add_parser("oracle", help="Monte-Carlo check of the analytic trace levels")
    add_scenario_arguments(parser)
    parser.add_argument("--samples", type=int, default=1_000_000)
    parser.set_defaults(handler=handle)


def compare_traces(run: ScenarioRun, n: int, seed: int) -> dict[str, OracleComparison]:
    """One sampling stream per trace, in trace order."""
    return {name: compare(probe.state, probe.signal, n, seed, stream, name)
            for stream, (name, probe) in enumerate(run.probes.items())}


def load_scenario(args: argparse.Namespace) -> ScenarioRun:
    manifest = manifest_from_args(args)
    if manifest.config is not None:
        return run_experiment(apply_overrides(load_config(manifest.config), args)).as_scenario()
    return run_preset(manifest.params, manifest.preset)


def handle(args: argparse.Namespace) -> int:
    run = load_scenario(args)
    comparisons = compare_traces(run, args.samples, args.seed)
    frame = pd.DataFrame([{"trace": c.name, "analytic": c.analytic, "empirical": c.empirical,
                           "stderr": c.stderr, "z": c.z} for c in comparisons.values()],
                         columns=["trace", "analytic", "empirical", "stderr", "z"])
    write_csv(frame, args.out / f"{run.traces.scenario}_oracle.csv")
    for c in comparisons.values():
        level = logging.INFO if c.agrees(AGREEMENT_SIGMAS) else logging.WARNING
        logger.log(level, "%-24s analytic %.6g empirical %.6g z %+.2f", c.name, c.analytic, c.empirical, c.z)
    return 0
