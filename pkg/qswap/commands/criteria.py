"""`qswap criteria`: two-party, PPT and multipartite tests on a scenario."""
from __future__ import annotations

import argparse
import logging
from dataclasses import replace

from qswap.commands.common import add_scenario_arguments, apply_overrides, load_config, manifest_from_args
from qswap.models import CriteriaSet
from qswap.schemas import SqueezedSource
from qswap.services.criteria import CriterionResult, ppt_all_bipartitions, vlf_all_bipartitions
from qswap.services.report import criteria_frame, write_csv
from qswap.services.scenarios import network_state, run_experiment, run_preset

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("criteria", help="entanglement criteria for a preset or config")
    add_scenario_arguments(parser)
    parser.add_argument("--which", type=CriteriaSet, choices=list(CriteriaSet), default=CriteriaSet.ALL)
    parser.add_argument("--restarts", type=int, default=8, help="random starts per vlf optimization")
    parser.set_defaults(handler=handle)


def _flag(results, mixed: bool) -> list[CriterionResult]:
    # ppt on mixed inputs is reported but has no closed-form target
    return [replace(r, params={**r.params, "mixed_sources": mixed}) for r in results]


def handle(args: argparse.Namespace) -> int:
    manifest = manifest_from_args(args)
    which = {args.which} if args.which is not CriteriaSet.ALL else {CriteriaSet.DUAN, CriteriaSet.PPT, CriteriaSet.VLF}
    if manifest.config is not None:
        spec = apply_overrides(load_config(manifest.config), args)
        run = run_experiment(spec)
        state = run.network
        name = spec.name
        mixed = any(isinstance(s, SqueezedSource) and not s.params.is_pure for s in spec.sources)
        duan = list(run.criteria())
    else:
        params = manifest.params
        state = network_state(params, manifest.preset)
        name = manifest.preset.value
        mixed = params.mixed
        duan = [c for c in run_preset(params, manifest.preset).criteria if c.criterion != "ppt"]

    results: list[CriterionResult] = []
    if CriteriaSet.DUAN in which:
        results += duan
    if CriteriaSet.PPT in which:
        summary = ppt_all_bipartitions(state)
        results += _flag(summary.results, mixed)
        logger.info("ppt: %d bipartitions, genuine multipartite: %s", len(summary.results), summary.genuine)
    if CriteriaSet.VLF in which:
        results += vlf_all_bipartitions(state, restarts=args.restarts, seed=args.seed)
    write_csv(criteria_frame(results), args.out / f"{name}_criteria.csv")
    for r in results:
        print(f"{r.criterion:<20} {r.value:12.6g} {r.threshold:10.6g}  {r.verdict.value}")
    return 0
