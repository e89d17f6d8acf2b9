import argparse
import logging
import sys

from pydantic import ValidationError

from qswap import __version__
from qswap.commands import criteria, oracle, run, sweep
from qswap.config import settings
from qswap.errors import ConfigError, QswapError
from qswap.services.presets import PRESET_HELP

LOG_FORMAT = "%(asctime)s [%(levelname)s] [%(name)s] %(message)s"

logger = logging.getLogger("qswap")


def build_parser() -> argparse.ArgumentParser:
    epilog = "presets:\n" + "\n".join(f"  {p.value:<11} {text}" for p, text in PRESET_HELP.items())
    parser = argparse.ArgumentParser(
        prog="qswap",
        description="Bright-beam entanglement swapping: noise traces, criteria and sampling checks.",
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbosity", default=settings.LOG_LEVEL.upper(),
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (run, sweep, criteria, oracle):
        command.register(subparsers)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format=LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S", stream=sys.stderr)
    logging.getLogger().setLevel(args.verbosity)
    try:
        return args.handler(args)
    except QswapError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except ValidationError as exc:
        logger.error("invalid parameters: %s", exc)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
