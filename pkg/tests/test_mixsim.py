import json
import math

import numpy as np
import pytest

from mixnet_workbench.config import Settings
from mixnet_workbench.errors import ConfigError, InvariantViolation
from mixnet_workbench.mixsim import (
    SELECTORS,
    AppRequest,
    CouplingContractError,
    Draws,
    ErlangLatency,
    LinkFault,
    PacketLedger,
    RandomStreams,
    bundled_scenarios,
    coupon_bound,
    coupon_collector_draws,
    coverage_rate,
    destination_for_box,
    harmonic,
    load_scenario,
    merged_stream,
    parse_scenario,
    read_trace_header,
    run,
    uniform_decoys,
    write_trace,
)
from mixnet_workbench.stats import category_counts, chi_square_uniform, ks_test

SMALL = """
name = "small"
mode = "echomix"
seed = 5
duration = 120.0

[topology]
clients = 6
gateways = 2
layer_width = 2
services = 3

[traffic]
client_rate = 1.0
app_fraction = 0.5
"""


class TestLatency:
    @pytest.mark.parametrize('x', [0.5, 1.0, 1.8, 4.0])
    def test_closed_form_matches_scipy(self, x):
        erlang = ErlangLatency(9, 5.0)
        assert erlang.closed_form_cdf(x) == pytest.approx(float(erlang.cdf(x)), abs=1e-12)

    def test_moments(self):
        erlang = ErlangLatency(9, 5.0)
        assert erlang.mean == pytest.approx(1.8)
        assert erlang.std == pytest.approx(0.6)

    def test_sum_of_exponential_hops_is_erlang(self):
        rng = RandomStreams(11).generator('hops')
        samples = rng.exponential(0.2, size=(20000, 9)).sum(axis=1)
        assert ks_test(samples, ErlangLatency(9, 5.0).cdf) > 0.001

    def test_invalid_parameters(self):
        with pytest.raises(ConfigError):
            ErlangLatency(0, 1.0)
        with pytest.raises(ConfigError):
            ErlangLatency(3, 0.0)


class TestCoupon:
    def test_harmonic(self):
        assert harmonic(1) == 1.0
        assert harmonic(3) == pytest.approx(1 + 1 / 2 + 1 / 3)

    def test_bound(self):
        bound = coupon_bound(width=3, gateways=3, rate=5.0)
        assert bound.per_mu == pytest.approx(3 * harmonic(3))
        assert bound.per_second == pytest.approx(bound.per_mu * 5.0)
        assert bound.constant_ratio == pytest.approx(harmonic(3) / math.log(3))

    def test_monte_carlo_matches_expectation(self):
        draws = coupon_collector_draws(10, RandomStreams(2).generator('coupon'), trials=2000)
        assert draws.mean() == pytest.approx(10 * harmonic(10), rel=0.05)
        assert draws.min() >= 10

    def test_coverage_rate_exceeds_coupon_bound(self):
        coverage = coverage_rate(width=3, gateways=3, rate=5.0, target=0.99)
        assert coverage.bound_multiple > 1
        assert (1 - math.exp(-coverage.per_link_per_mu)) ** 9 == pytest.approx(0.99)

    def test_coverage_target_bounds(self):
        with pytest.raises(ConfigError):
            coverage_rate(3, 3, 5.0, target=1.0)


class TestCoupling:
    @pytest.mark.parametrize('selector', ['alternate', 'history-dependent', 'bursty'])
    def test_merged_stream_stays_uniform(self, selector):
        streams = RandomStreams(3)
        services = 5
        app_rng = streams.generator('app')
        app = (AppRequest(int(d)) for d in iter(lambda: app_rng.integers(0, services), None))
        history = merged_stream(
            20000,
            uniform_decoys(streams.generator('decoys'), services),
            app,
            0.5,
            SELECTORS[selector],
            streams.generator('arrivals'),
        )
        assert chi_square_uniform(category_counts(history, range(services))).passes()

    def test_biased_application_stream_is_caught(self):
        streams = RandomStreams(3)
        app = iter(lambda: AppRequest(0), None)
        history = merged_stream(
            20000, uniform_decoys(streams.generator('decoys'), 5), app, 0.5, SELECTORS['alternate'], streams.generator('a')
        )
        assert not chi_square_uniform(category_counts(history, range(5))).passes()

    def test_contract_violation_raises(self):
        streams = RandomStreams(3)
        app = iter(lambda: AppRequest(1, pseudorandom=False), None)
        with pytest.raises(CouplingContractError):
            merged_stream(
                100, uniform_decoys(streams.generator('d'), 5), app, 1.0, SELECTORS['always-app'], streams.generator('a')
            )

    def test_destination_for_box_is_stable(self):
        assert destination_for_box(b'box', 7) == destination_for_box(b'box', 7)
        assert 0 <= destination_for_box(b'box', 7) < 7


class TestRng:
    def test_named_streams_are_independent_of_creation_order(self):
        a = RandomStreams(1)
        a.generator('x')
        first = a.generator('y').random()
        assert RandomStreams(1).generator('y').random() == first

    def test_draws(self):
        draws = Draws(RandomStreams(1).generator('d'))
        values = [draws.index(4) for _ in range(5000)]
        assert set(values) == {0, 1, 2, 3}
        assert np.mean([draws.exponential(2.0) for _ in range(20000)]) == pytest.approx(2.0, rel=0.05)


class TestLedger:
    def test_double_emission(self):
        ledger = PacketLedger()
        ledger.emit(1, 'client')
        with pytest.raises(InvariantViolation):
            ledger.emit(1, 'client')

    def test_settle_without_emission(self):
        with pytest.raises(InvariantViolation):
            PacketLedger().deliver(9)


class TestFaults:
    def test_patterns_and_windows(self):
        fault = LinkFault('L1-*', 'L2-1', start=10.0, end=20.0, exempt_src='L1-2')
        assert fault.applies('L1-0', 'L2-1', 15.0)
        assert not fault.applies('L1-0', 'L2-1', 25.0)
        assert not fault.applies('L1-2', 'L2-1', 15.0)
        assert not fault.applies('L1-0', 'L2-0', 15.0)


class TestScenario:
    def test_bundled(self):
        assert {'echomix-baseline', 'echomix-leak-control', 'heartbeat-fault', 'loopix-leak'} <= set(bundled_scenarios())
        assert load_scenario('echomix-baseline').mode == 'echomix'

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_scenario(SMALL + '\nbogus = 1\n')

    def test_invalid_toml(self):
        with pytest.raises(ConfigError):
            parse_scenario('name = ')

    def test_conversation_parties_must_exist(self):
        with pytest.raises(ConfigError):
            parse_scenario(SMALL + '\n[conversation]\nsender = 0\nreceiver = 9\n')

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_scenario(str(tmp_path / 'missing.toml'))

    def test_scenario_dir(self, tmp_path):
        (tmp_path / 'mine.toml').write_text(SMALL.replace('"small"', '"mine"'))
        assert load_scenario('mine', Settings(scenario_dir=tmp_path)).name == 'mine'


class TestSimulation:
    def test_small_echomix_run(self, tmp_path):
        scenario = parse_scenario(SMALL)
        result = run(scenario)
        summary = result.summary
        assert summary.emitted == summary.delivered + summary.dropped + summary.in_flight
        assert summary.round_trips > 0
        assert result.log.wire_sizes() == {summary.packet_bytes}
        assert summary.analytic_rtt_s == pytest.approx(9 * 0.2)

        path = write_trace(tmp_path / 'small.jsonl', scenario, 5, result.log, summary)
        header = read_trace_header(path)
        assert header.seed == 5 and header.scenario.name == 'small'
        lines = path.read_text().splitlines()
        assert json.loads(lines[-1])['type'] == 'summary'
        assert len(lines) == len(result.log) + 2

    def test_same_seed_same_summary(self):
        scenario = parse_scenario(SMALL)
        assert run(scenario, 9).summary == run(scenario, 9).summary

    @pytest.mark.slow
    def test_heartbeat_isolates_the_faulty_link(self):
        summary = run(load_scenario('heartbeat-fault')).summary
        collapsed = {link for report in summary.link_ratings for link in report.collapsed}
        assert collapsed == {'L1-0->L2-1'}

    @pytest.mark.slow
    def test_last_hop_leak_loopix_versus_echomix(self):
        assert run(load_scenario('loopix-leak')).summary.last_hop.detected
        assert not run(load_scenario('echomix-leak-control')).summary.last_hop.detected

    @pytest.mark.slow
    def test_baseline_is_uniform_and_memoryless(self):
        summary = run(load_scenario('echomix-baseline')).summary
        assert summary.emission_uniformity_p > 0.001
        assert summary.memorylessness_p > 0.001
        assert summary.mean_rtt_s == pytest.approx(summary.analytic_rtt_s, rel=0.1)
