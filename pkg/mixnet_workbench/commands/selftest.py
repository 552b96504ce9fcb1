import argparse

from mixnet_workbench.commands.common import (
    EXIT_FAILURE,
    EXIT_OK,
    Command,
    add_common_flags,
    emit_records,
    print_table,
)
from mixnet_workbench.config import Settings
from mixnet_workbench.selftest import SUITES, run_selftest


def _configure(parser: argparse.ArgumentParser):
    parser.add_argument(
        '--suite', action='append', help=f'Suite to run; repeatable (default: all of {", ".join(SUITES)})'
    )
    parser.add_argument(
        '--fault', action='append', default=[], help='Inject the named suite\'s defect; that suite must fail'
    )
    add_common_flags(parser)


def _run(args: argparse.Namespace, settings: Settings) -> int:
    seed = args.seed if args.seed is not None else settings.default_seed  # every suite derives its streams from this
    report = run_selftest(seed, args.suite, args.fault, settings.selftest_scale)
    if args.records:
        emit_records([*report.verdicts, report])  # the aggregate report is always the last record
    else:
        print_table(
            [(v.suite, 'pass' if v.passed else 'FAIL', round(v.seconds, 1), v.detail) for v in report.verdicts],
            ['suite', 'result', 'time (s)', 'detail'],
        )
    return EXIT_OK if report.passed else EXIT_FAILURE


command = Command('selftest', 'Run the statistical acceptance suites', _configure, _run)
