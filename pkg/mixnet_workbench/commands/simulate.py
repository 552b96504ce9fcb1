import argparse
import logging
from pathlib import Path

from mixnet_workbench.commands.common import EXIT_OK, Command, add_common_flags, emit_records, print_table
from mixnet_workbench.config import Settings
from mixnet_workbench.dto import SimulationSummary
from mixnet_workbench.errors import ConfigError
from mixnet_workbench.mixsim import load_scenario, run, write_trace

logger = logging.getLogger(__name__)


def _configure(parser: argparse.ArgumentParser):
    parser.add_argument(
        '--config', default='echomix-baseline', help='Scenario file, or the name of a bundled scenario'
    )
    parser.add_argument('--out', type=Path, default=None, help='Output directory (default: MIXNET_OUTPUT_DIR)')
    add_common_flags(parser)


def _summary_rows(summary: SimulationSummary) -> list[tuple[str, object]]:
    rows: list[tuple[str, object]] = [
        ('scenario', summary.scenario),
        ('mode', summary.mode),
        ('seed', summary.seed),
        ('duration (s)', summary.duration_s),
        ('packet (B)', summary.packet_bytes),
        ('emitted (pkt)', summary.emitted),
        ('delivered (pkt)', summary.delivered),
        ('dropped (pkt)', summary.dropped),
        ('round trips', summary.round_trips),
        ('mean RTT (s)', summary.mean_rtt_s),
        ('analytic RTT (s)', summary.analytic_rtt_s),
        ('destination uniformity (p)', summary.emission_uniformity_p),
        ('worst client uniformity (p)', summary.worst_client_uniformity_p),
        ('link coverage (share of windows)', summary.link_coverage),
        ('memorylessness (p)', summary.memorylessness_p),
    ]
    if summary.last_hop is not None:
        rows += [
            ('last-hop target', summary.last_hop.target),
            ('last-hop target z', summary.last_hop.target_z),
            ('last-hop max |z|', summary.last_hop.max_abs_z),
            ('last-hop detected', summary.last_hop.detected),
        ]
    for report in summary.link_ratings:
        if report.collapsed:
            rows.append((f'collapsed links (epoch {report.epoch})', ', '.join(report.collapsed)))
    return rows


def _run(args: argparse.Namespace, settings: Settings) -> int:
    scenario = load_scenario(args.config, settings)
    seed = args.seed if args.seed is not None else scenario.seed  # --seed wins over the file
    result = run(scenario, seed)
    summary = result.summary

    out = args.out or settings.output_dir
    stem = f'{scenario.name}-{seed}'  # one summary and trace pair per (scenario, seed)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / f'{stem}.summary.json').write_text(summary.model_dump_json(indent=2), encoding='utf-8')
    except OSError as e:
        raise ConfigError(f'cannot write summary: {e}', field='out') from e
    # The trace is optional; the summary is always written
    if scenario.observer.record_trace:
        write_trace(out / f'{stem}.jsonl', scenario, seed, result.log, summary)

    if args.records:
        emit_records([summary])
    else:
        print_table(_summary_rows(summary), ['metric', 'value'])
    return EXIT_OK


command = Command('simulate', 'Run a traffic scenario and write its trace and summary', _configure, _run)
