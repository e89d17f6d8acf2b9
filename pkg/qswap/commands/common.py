"""Arguments shared by the subcommands and the run manifest built from them."""
from __future__ import annotations

import argparse
import json
import logging
from pathlib import Path

from qswap.config import settings
from qswap.errors import ConfigError
from qswap.models import Preset
from qswap.schemas import (
    DbmAnchor,
    ExperimentSpec,
    FeedforwardSpec,
    RunManifest,
    SqueezerParams,
    SwapParams,
    VisibilityElement,
    db_to_linear,
)

logger = logging.getLogger(__name__)


def add_scenario_arguments(parser: argparse.ArgumentParser):
    scenario = parser.add_mutually_exclusive_group(required=True)
    scenario.add_argument("--preset", type=Preset, choices=list(Preset), metavar="NAME",
                          help="built-in scenario: " + ", ".join(p.value for p in Preset))
    scenario.add_argument("--config", type=Path, help="ExperimentSpec JSON file")
    add_source_arguments(parser)


def add_source_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--squeezing-db", type=float, default=None,
                        help="squeezing below shot noise for all squeezed sources")
    parser.add_argument("--excess-db", type=float, default=None,
                        help="anti-squeezed quadrature above shot noise (default 20 dB)")
    parser.add_argument("--pure", action="store_true", help="minimum-uncertainty sources, h = 1/s")
    parser.add_argument("--gain-x", type=float, default=None)
    parser.add_argument("--gain-y", type=float, default=None)
    parser.add_argument("--visibility", type=float, default=None)
    parser.add_argument("--elec-noise-db", type=float, nargs="?", const=settings.ELEC_NOISE_DB, default=None,
                        help=f"electronic noise floor relative to each tap's shot level "
                             f"(flag alone: {settings.ELEC_NOISE_DB} dB)")
    parser.add_argument("--dbm-anchor", type=float, default=None,
                        help="absolute level in dBm of one beam's shot noise")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=Path(settings.OUT_DIR))


def swap_params(args: argparse.Namespace) -> SwapParams:
    base = SwapParams()
    update = {}
    s = base.squeezing_i if args.squeezing_db is None else db_to_linear(-args.squeezing_db)
    h = None
    if args.pure:
        h = 1 / s
    elif args.excess_db is not None:
        h = db_to_linear(args.excess_db)
    elif args.squeezing_db == 0:
        h = 1.0
    elif args.squeezing_db is not None:
        h = base.excess_i
    if h is not None:
        # raises on s*h < 1
        SqueezerParams(power=base.power, squeezing=s, excess=h)
        update.update(squeezing_i=s, excess_i=h, squeezing_ii=s, excess_ii=h)
    for key in ("gain_x", "gain_y", "visibility", "elec_noise_db", "dbm_anchor"):
        if getattr(args, key) is not None:
            update[key] = getattr(args, key)
    return SwapParams.model_validate({**base.model_dump(), **update})


def manifest_from_args(args: argparse.Namespace) -> RunManifest:
    return RunManifest(preset=args.preset, config=args.config, out_dir=args.out, params=swap_params(args),
                       oracle=getattr(args, "oracle", 0), seed=args.seed)


def load_config(path: Path) -> ExperimentSpec:
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    return ExperimentSpec.model_validate(raw)


def apply_overrides(spec: ExperimentSpec, args: argparse.Namespace) -> ExperimentSpec:
    """Command-line knobs win over the values in a config file."""
    update = {}
    if args.visibility is not None:
        update["elements"] = [
            VisibilityElement(kind="visibility", modes=el.modes, visibility=args.visibility)
            if el.kind == "visibility" else el for el in spec.elements]
    if args.gain_x is not None or args.gain_y is not None:
        update["feedforward"] = [
            FeedforwardSpec(sig_x=f.sig_x, sig_y=f.sig_y, target=f.target,
                            gain_x=f.gain_x if args.gain_x is None else args.gain_x,
                            gain_y=f.gain_y if args.gain_y is None else args.gain_y)
            for f in spec.feedforward]
    if args.elec_noise_db is not None or args.dbm_anchor is not None:
        anchors = spec.anchors
        if args.elec_noise_db is not None:
            anchors = anchors.model_copy(update={"elec_noise_db": args.elec_noise_db})
        if args.dbm_anchor is not None:
            anchors = anchors.model_copy(update={"dbm": DbmAnchor(dbm=args.dbm_anchor)})
        update["anchors"] = anchors
    if args.squeezing_db is not None or args.excess_db is not None:
        logger.warning("squeezing flags are ignored for config files; edit the sources instead")
    return spec.model_copy(update=update) if update else spec
