import json

import pytest

from mixnet_workbench.commands import simulate
from mixnet_workbench.commands.common import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, print_table
from mixnet_workbench.errors import InvariantViolation
from mixnet_workbench.main import build_parser, main

SMALL = """
name = "cli-small"
mode = "echomix"
duration = 60.0

[topology]
clients = 4
gateways = 2
layer_width = 2
services = 2
"""


def _records(out: str) -> list[dict]:
    return [json.loads(line) for line in out.splitlines() if line.strip()]


def test_every_command_is_registered():
    subparsers = build_parser()._subparsers._group_actions[0].choices
    assert set(subparsers) == {'geometry', 'bandwidth', 'simulate', 'selftest'}


def test_geometry_records(capsys):
    assert main(['geometry', '--records']) == EXIT_OK
    rows = _records(capsys.readouterr().out)
    assert [r['suite'] for r in rows] == ['x25519', 'x25519-kem']
    assert rows[0]['type'] == 'GeometryRow'
    assert (rows[0]['header_bytes'], rows[0]['overhead_bytes']) == (476, 1082)
    assert (rows[1]['header_bytes'], rows[1]['overhead_bytes']) == (636, 1402)


def test_geometry_table_for_every_suite(capsys):
    assert main(['geometry', '--all']) == EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith('suite')
    assert 'mlkem768-x448' in out and 'header (B)' in out


def test_bandwidth(capsys):
    assert main(['bandwidth', '--rate', '2.5', '--records']) == EXIT_OK
    (report,) = _records(capsys.readouterr().out)
    assert report['packet_bytes'] == 31082
    assert report['bytes_per_s'] == pytest.approx(77705)
    assert report['gigabytes_per_day'] == pytest.approx(6.7137, abs=1e-3)
    assert report['payload_efficiency'] == pytest.approx(0.965, abs=1e-3)


@pytest.mark.parametrize(
    'argv',
    [
        ['bandwidth', '--rate', '0'],
        ['geometry', '--suite', 'rsa-2048'],
        ['geometry', '--max-hops', '0'],
        ['frobnicate'],
        ['selftest', '--suite', 'nope'],
        ['simulate', '--config', 'does-not-exist.toml'],
    ],
)
def test_usage_errors_exit_2(argv):
    assert main(argv) == EXIT_USAGE


def test_selftest_exit_codes(capsys):
    assert main(['selftest', '--suite', 'geometry', '--suite', 'bandwidth']) == EXIT_OK
    assert 'pass' in capsys.readouterr().out
    assert main(['selftest', '--suite', 'geometry', '--fault', 'geometry', '--records']) == EXIT_FAILURE
    records = _records(capsys.readouterr().out)
    assert records[-1]['type'] == 'SelftestReport' and not records[-1]['passed']


def test_simulate_writes_summary_and_trace(tmp_path, capsys):
    config = tmp_path / 'small.toml'
    config.write_text(SMALL)
    out = tmp_path / 'out'
    assert main(['simulate', '--config', str(config), '--out', str(out), '--seed', '3']) == EXIT_OK
    summary = json.loads((out / 'cli-small-3.summary.json').read_text())
    assert summary['seed'] == 3 and summary['scenario'] == 'cli-small'
    trace = (out / 'cli-small-3.jsonl').read_text().splitlines()
    assert json.loads(trace[0])['type'] == 'header'
    assert 'emitted (pkt)' in capsys.readouterr().out


def test_simulate_exits_1_on_invariant_violation(tmp_path, monkeypatch):
    def violated(scenario, seed=None, pki=None):
        raise InvariantViolation('packet 12 both delivered and dropped')

    monkeypatch.setattr(simulate, 'run', violated)
    config = tmp_path / 'small.toml'
    config.write_text(SMALL)
    out = tmp_path / 'out'
    assert main(['simulate', '--config', str(config), '--out', str(out)]) == EXIT_FAILURE
    assert not (out / 'cli-small-1.summary.json').exists()


def test_print_table_alignment(capsys):
    print_table([('a', 1.5), ('long name', None)], ['name', 'value (s)'])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'name       value (s)'
    assert lines[3] == 'long name  -'
