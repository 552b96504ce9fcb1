import pytest

from mixnet_workbench import selftest
from mixnet_workbench.errors import ConfigError, InvariantViolation
from mixnet_workbench.selftest import SUITES, Outcome, run_selftest, run_suite

DETERMINISTIC = ['geometry', 'bandwidth']
STATISTICAL = ['erlang', 'coupling', 'coupon', 'sharding', 'bacap']


@pytest.mark.parametrize('name', DETERMINISTIC)
def test_deterministic_suites_pass_and_catch_their_fault(name):
    assert run_suite(name, seed=1).passed
    assert not run_suite(name, seed=1, fault=True).passed


def test_sphinx_suite():
    verdict = run_suite('sphinx', seed=1, scale=0.1)
    assert verdict.passed, verdict.detail
    assert not run_suite('sphinx', seed=1, scale=0.1, fault=True).passed


def test_report_aggregates_verdicts():
    report = run_selftest(1, suites=['geometry', 'bandwidth'], faults=['bandwidth'])
    assert [v.suite for v in report.verdicts] == ['geometry', 'bandwidth']
    assert [v.passed for v in report.verdicts] == [True, False]
    assert not report.passed


def test_unknown_suite_is_a_config_error():
    with pytest.raises(ConfigError):
        run_selftest(1, suites=['nope'])
    with pytest.raises(ConfigError):
        run_selftest(1, suites=['geometry'], faults=['nope'])


def test_raising_suite_becomes_a_failed_verdict(monkeypatch):
    def broken(seed, scale, fault):
        raise InvariantViolation('packet 3 settled twice')

    monkeypatch.setitem(SUITES, 'broken', broken)
    verdict = run_suite('broken', seed=1)
    assert not verdict.passed
    assert 'InvariantViolation' in verdict.detail


@pytest.mark.parametrize('name, scenario_name', [('last-hop', 'loopix-leak'), ('heartbeat', 'heartbeat-fault')])
def test_scenario_suites_run_with_the_requested_seed(monkeypatch, name, scenario_name):
    calls = []

    def fake_run(scenario, seed=None, pki=None):
        calls.append((scenario.name, seed))
        raise InvariantViolation('stop after recording the seed')

    monkeypatch.setattr(selftest, 'run_simulation', fake_run)
    verdict = run_suite(name, seed=12345)
    assert not verdict.passed
    assert calls == [(scenario_name, 12345)]


def test_scale_has_a_floor():
    assert selftest._n(100_000, 0.00001) == 10
    assert selftest._n(100, 2.0) == 200


def test_outcome_is_immutable():
    with pytest.raises(AttributeError):
        Outcome(True, '').passed = False


@pytest.mark.slow
@pytest.mark.parametrize('name', STATISTICAL)
def test_statistical_suites_pass_and_catch_their_fault(name):
    verdict = run_suite(name, seed=1)
    assert verdict.passed, verdict.detail
    assert not run_suite(name, seed=1, fault=True).passed


@pytest.mark.slow
@pytest.mark.parametrize('name', ['last-hop', 'heartbeat'])
def test_scenario_suites(name):
    verdict = run_suite(name, seed=1)
    assert verdict.passed, verdict.detail
