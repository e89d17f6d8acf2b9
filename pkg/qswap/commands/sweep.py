"""`qswap sweep`: swap-output Duan sum along one parameter."""
from __future__ import annotations

import argparse
import logging

from qswap.commands.common import add_source_arguments, swap_params
from qswap.models import Preset, SweepParam
from qswap.services.report import sparkline, write_csv
from qswap.services.scenarios import swap_sweep, sweep_values

logger = logging.getLogger(__name__)

DEFAULT_RANGES = {
    SweepParam.SQUEEZING: (0.0, 6.0),
    SweepParam.GAIN: (0.0, 2.0),
    SweepParam.VISIBILITY: (0.8, 1.0),
}


def register(subparsers):
    parser = subparsers.add_parser("sweep", help="sweep squeezing, gain or visibility for the swap")
    parser.add_argument("--which", type=SweepParam, choices=list(SweepParam), default=SweepParam.SQUEEZING)
    parser.add_argument("--start", type=float, default=None)
    parser.add_argument("--stop", type=float, default=None)
    parser.add_argument("--steps", type=int, default=25)
    parser.add_argument("--preset", type=Preset, choices=list(Preset), default=Preset.SWAP, metavar="NAME",
                        help="preset whose traces are reported at each point")
    add_source_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    lo, hi = DEFAULT_RANGES[args.which]
    values = sweep_values(lo if args.start is None else args.start,
                          hi if args.stop is None else args.stop, args.steps)
    result = swap_sweep(args.which, values, swap_params(args), pure=args.pure, preset=args.preset)
    write_csv(result.frame, args.out / f"sweep_{args.which.value}.csv")
    print(f"{args.which.value:>10} {values[0]:g} .. {values[-1]:g}")
    print(f"{'duan':>10} " + sparkline(result.frame["duan"].tolist()))
    if result.crossing:
        print(f"separable bound crossed between {result.crossing[0]:g} and {result.crossing[1]:g}")
    else:
        logger.info("no crossing of the separable bound in range")
    return 0
