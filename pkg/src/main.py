import argparse
import logging
import sys
from typing import Optional, Sequence

from cli import COMMANDS
from config import get_settings
from exceptions import exit_code_for

logger = logging.getLogger(__name__)

parser = argparse.ArgumentParser(
    prog="pgc",
    description="Perspective-guided convolution: spatially variant Gaussian "
                "smoothing of feature maps driven by a perspective map, "
                "with a low-rank eigen-kernel fast path, toy crowd-counting "
                "networks and a perspective estimator.",
)
subparsers = parser.add_subparsers(dest="command", required=True)

for command in COMMANDS:
    command.register(subparsers)


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = parser.parse_args(argv)
    settings = get_settings()
    logging.basicConfig(
        level=settings.LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except Exception as e:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"pgc {args.command}: {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(run())
