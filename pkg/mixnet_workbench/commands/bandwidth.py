import argparse

from mixnet_workbench.commands.common import EXIT_OK, Command, emit_records, print_table
from mixnet_workbench.config import Settings
from mixnet_workbench.dto import BandwidthReport
from mixnet_workbench.errors import ConfigError
from mixnet_workbench.sphinx import geometry

SECONDS_PER_DAY = 86400


def bandwidth_report(rate: float, suite: str = 'x25519', max_hops: int = 5, payload: int = 30000) -> BandwidthReport:
    """Traffic of one client sending ``rate`` fixed-size packets per second."""
    if rate <= 0:
        raise ConfigError('packet rate must be positive', field='rate')
    g = geometry(suite, max_hops, payload)
    per_second = rate * g.packet_size  # decoys and application packets cost the same
    return BandwidthReport(
        suite=g.suite_name,
        rate_pkt_per_s=rate,
        packet_bytes=g.packet_size,
        payload_bytes=g.payload_size,
        bytes_per_s=per_second,
        bytes_per_day=per_second * SECONDS_PER_DAY,
        gigabytes_per_day=per_second * SECONDS_PER_DAY / 1e9,
        payload_efficiency=g.payload_efficiency,
    )


def _configure(parser: argparse.ArgumentParser):
    parser.add_argument('--rate', type=float, default=2.5, help='Packets per second per client')
    parser.add_argument('--suite', default='x25519')
    parser.add_argument('--max-hops', type=int, default=5)
    parser.add_argument('--payload', type=int, default=30000, help='User payload in bytes')
    parser.add_argument('--records', action='store_true', help='Print one JSON record per line')


def _run(args: argparse.Namespace, settings: Settings) -> int:
    report = bandwidth_report(args.rate, args.suite, args.max_hops, args.payload)
    if args.records:
        emit_records([report])
        return EXIT_OK
    print_table(
        [
            (
                report.suite,
                report.rate_pkt_per_s,
                report.packet_bytes,
                report.payload_bytes,
                round(report.bytes_per_s),
                round(report.gigabytes_per_day, 2),
                f'{report.payload_efficiency:.1%}',
            )
        ],
        ['suite', 'rate (pkt/s)', 'packet (B)', 'payload (B)', 'traffic (B/s)', 'traffic (GB/day)', 'efficiency (%)'],
    )
    return EXIT_OK


command = Command('bandwidth', 'Per-client traffic for a packet rate and geometry', _configure, _run)
