import argparse
import logging

from mixnet_workbench.commands.common import EXIT_OK, Command, emit_records, print_table
from mixnet_workbench.config import Settings
from mixnet_workbench.crypto_core import suite_names
from mixnet_workbench.dto import GeometryRow
from mixnet_workbench.sphinx import geometry

logger = logging.getLogger(__name__)

DEFAULT_SUITES = ['x25519', 'x25519-kem']


def geometry_row(suite: str, max_hops: int, payload: int) -> GeometryRow:
    g = geometry(suite, max_hops, payload)
    return GeometryRow(
        suite=g.suite_name,
        kind=g.kind,
        max_hops=g.max_hops,
        round_trip_hops=g.round_trip_hops,
        payload_size=g.payload_size,
        alpha_bytes=g.alpha_size,
        beta_bytes=g.beta_size,
        gamma_bytes=g.gamma_size,
        header_bytes=g.header_size,
        surb_bytes=g.surb_size,
        overhead_bytes=g.overhead_size,
        packet_bytes=g.packet_size,
    )


def _configure(parser: argparse.ArgumentParser):
    parser.add_argument('--suite', action='append', help='Suite to size; repeatable (default: x25519, x25519-kem)')
    parser.add_argument('--all', action='store_true', help='Size every registered suite')
    parser.add_argument('--max-hops', type=int, default=5, help='Hops one header routes through')
    parser.add_argument('--payload', type=int, default=30000, help='User payload in bytes')
    parser.add_argument('--records', action='store_true', help='Print one JSON record per line')


def _run(args: argparse.Namespace, settings: Settings) -> int:
    suites = suite_names() if args.all else (args.suite or DEFAULT_SUITES)  # unknown names raise UnknownSuiteError, exit 2
    rows = [geometry_row(name, args.max_hops, args.payload) for name in suites]
    if args.records:
        emit_records(rows)
        return EXIT_OK
    print_table(
        [
            (
                r.suite,
                r.kind,
                r.max_hops,
                r.round_trip_hops,
                r.alpha_bytes,
                r.beta_bytes,
                r.gamma_bytes,
                r.header_bytes,
                r.surb_bytes,
                r.overhead_bytes,
                r.packet_bytes,
            )
            for r in rows
        ],
        [
            'suite',
            'kind',
            'hops',
            'round-trip hops',
            'alpha (B)',
            'beta (B)',
            'gamma (B)',
            'header (B)',
            'SURB (B)',
            'header+SURB (B)',
            'packet (B)',
        ],
    )
    return EXIT_OK


command = Command('geometry', 'Print Sphinx header, SURB and packet sizes', _configure, _run)
