import argparse
import logging
import sys
from collections.abc import Sequence

from pydantic import ValidationError

from mixnet_workbench.commands import bandwidth, geometry, selftest, simulate
from mixnet_workbench.commands.common import EXIT_FAILURE, EXIT_USAGE, Command
from mixnet_workbench.config import get_settings
from mixnet_workbench.crypto_core import UnknownSuiteError
from mixnet_workbench.errors import ConfigError, InvariantViolation, WorkbenchError
from mixnet_workbench.sphinx import GeometryError

logger = logging.getLogger(__name__)

COMMANDS: list[Command] = [geometry.command, bandwidth.command, simulate.command, selftest.command]

# Errors a user fixes by changing flags, files or environment.
USAGE_ERRORS = (ConfigError, UnknownSuiteError, GeometryError, OSError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='echomix', description='Echomix mixnet protocol workbench')
    sub = parser.add_subparsers(dest='command', required=True)
    for command in COMMANDS:
        p = sub.add_parser(command.name, help=command.help, description=command.help)
        command.configure(p)
        p.set_defaults(handler=command.handler)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0

    try:
        settings = get_settings()
    except ValidationError as e:
        print(f'error: invalid settings: {e}', file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=settings.log_level.upper(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )

    try:
        return args.handler(args, settings)
    except USAGE_ERRORS as e:
        logger.error(f'{args.command}: {e}')
        return EXIT_USAGE
    except InvariantViolation as e:
        logger.error(f'{args.command}: invariant violated: {e}')
        return EXIT_FAILURE
    except WorkbenchError as e:
        logger.error(f'{args.command}: {type(e).__name__}: {e}')
        return EXIT_FAILURE


def run():
    sys.exit(main())
