"""The statistical acceptance suite.

Each suite takes ``(seed, scale, fault)`` and returns an :class:`Outcome`. ``scale`` multiplies sample
sizes; ``fault`` injects a targeted defect that the suite must report as a failure.
"""

import logging
import time
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from mixnet_workbench.bacap import (
    CapabilityRegressionError,
    Context,
    SequenceCursor,
    advance_cap,
    generate_write_cap,
    keys_at,
    read_cap_from,
    recover_root,
    seal,
    verify,
)
from mixnet_workbench.commands.bandwidth import bandwidth_report
from mixnet_workbench.crypto_core import InstrumentedKem, InstrumentedNike, NikeSuite, get_suite, hash256
from mixnet_workbench.dto import SelftestReport, SuiteVerdict
from mixnet_workbench.errors import ConfigError, WorkbenchError
from mixnet_workbench.mixsim import (
    SELECTORS,
    AppRequest,
    coupon_bound,
    coupon_collector_draws,
    coverage_rate,
    destination_for_box,
    harmonic,
    load_scenario,
    merged_stream,
    rtt_distribution,
    run as run_simulation,
    uniform_decoys,
)
from mixnet_workbench.mixsim.rng import RandomStreams
from mixnet_workbench.pigeonhole import ShardMap, all_or_nothing_sweep, backfill_after_retention
from mixnet_workbench.sphinx import (
    ForwardEvent,
    PathHop,
    PathSpec,
    PayloadIntegrityError,
    SphinxPacket,
    geometry,
    recipient_id,
    unwrap,
    wrap,
)
from mixnet_workbench.stats import category_counts, chi_square_uniform, frequency_distinguisher

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Outcome:
    passed: bool
    detail: str


Suite = Callable[[int, float, bool], Outcome]


def _n(base: int, scale: float, minimum: int = 10) -> int:
    return max(minimum, int(base * scale))


# Latency


def erlang_suite(seed: int, scale: float, fault: bool) -> Outcome:
    mu, hops = 0.2, 9
    rng = RandomStreams(seed).generator('selftest/erlang')
    trips = rng.exponential(mu * (1.1 if fault else 1.0), size=(_n(100_000, scale), hops)).sum(axis=1)
    dist = rtt_distribution(hops, 1.0 / mu)
    mean = float(trips.mean())
    tail = float((trips > 4.0).mean())
    analytic_tail = float(dist.sf(4.0))
    closed_form_agrees = abs((1.0 - dist.closed_form_cdf(4.0)) - analytic_tail) < 1e-9
    passed = abs(mean - dist.mean) / dist.mean <= 0.01 and 0.0013 <= tail <= 0.0028 and closed_form_agrees
    return Outcome(passed, f'mean RTT {mean:.4f}s (analytic {dist.mean:.4f}s), P(RTT>4s) {tail:.5f} (analytic {analytic_tail:.5f})')


# Coupling


def coupling_suite(seed: int, scale: float, fault: bool) -> Outcome:
    services, emissions = 10, _n(100_000, scale)
    streams = RandomStreams(seed)

    def run(selector: str, broken: bool) -> float:
        rng = streams.generator(f'selftest/coupling/{selector}/{broken}')

        def app_source():
            while True:
                if broken:
                    yield AppRequest(0, pseudorandom=False)
                else:
                    yield AppRequest(destination_for_box(rng.bytes(32), services))

        history = merged_stream(
            emissions, uniform_decoys(rng, services), app_source(), 0.5, SELECTORS[selector], rng, strict=False
        )
        return chi_square_uniform(category_counts(history, range(services))).pvalue

    selectors = ['alternate', 'history-dependent', 'bursty']
    honest = {name: run(name, broken=fault) for name in selectors}
    control = run('alternate', broken=not fault)
    passed = all(p > 0.01 for p in honest.values()) and control <= 0.01
    detail = ', '.join(f'{name} p={p:.3g}' for name, p in honest.items())
    return Outcome(passed, f'{detail}; broken client p={control:.3g}')


# Coupon bound and link coverage


def coupon_suite(seed: int, scale: float, fault: bool) -> Outcome:
    width, gateways, mu = 10, 3, 0.2
    rng = RandomStreams(seed).generator('selftest/coupon')
    draws = coupon_collector_draws(width, rng, trials=_n(10_000, scale))
    expected = width * harmonic(width)
    mean = float(draws.mean())

    if fault:
        per_gateway = coupon_bound(width, gateways, 1.0 / mu).per_mu
    else:
        per_gateway = coverage_rate(width, gateways, 1.0 / mu, target=0.99, link_layers=2).per_gateway_per_mu
    windows = _n(2000, scale)
    covered = 0
    for _ in range(windows):
        packets = rng.poisson(per_gateway * gateways)
        first, second, third = (rng.integers(0, width, size=packets) for _ in range(3))
        links_12 = np.unique(first * width + second).size
        links_23 = np.unique(second * width + third).size
        covered += links_12 == width * width and links_23 == width * width
    coverage = covered / windows
    passed = abs(mean - expected) / expected <= 0.02 and coverage >= 0.95
    return Outcome(
        passed,
        f'mean draws {mean:.2f} (n·H_n {expected:.2f}); {coverage:.1%} of windows cover every link '
        f'at {per_gateway:.1f} packets per gateway per mu',
    )


# Sharding


def sharding_suite(seed: int, scale: float, fault: bool) -> Outcome:
    n, k, boxes = 10, 2, _n(100_000, scale, minimum=1000)
    rng = RandomStreams(seed).generator('selftest/sharding')
    replicas = [(hash256(b'replica', bytes([i])), rng.bytes(32)) for i in range(n)]
    shard_map = ShardMap(replicas, k)
    reduced = shard_map.without(replicas[0][0])
    pairs = list(combinations(sorted(r[0] for r in replicas), 2))
    distinct = 3 if fault else boxes
    ids = [rng.bytes(32) for _ in range(distinct)]

    selections, moved = [], 0
    for i in range(boxes):
        box_id = ids[i % distinct]
        chosen = shard_map.select(box_id)
        selections.append(tuple(sorted(chosen)))
        moved += set(chosen) != set(reduced.select(box_id))
    share = moved / boxes
    p = chi_square_uniform(category_counts(selections, pairs)).pvalue
    passed = abs(share - k / n) <= 0.02 and p > 0.01
    return Outcome(passed, f'{share:.1%} of boxes move when one of {n} replicas leaves; pair uniformity p={p:.3g}')


# BACAP


def bacap_suite(seed: int, scale: float, fault: bool) -> Outcome:
    entropy = RandomStreams(seed).entropy('selftest/bacap')
    write_cap = generate_write_cap(entropy)
    read_cap = read_cap_from(write_cap)
    contexts = [Context(hash256(b'selftest-context', bytes([i]))) for i in range(3)]
    indices = _n(10_000, scale)

    agree = True
    for ctx in contexts:
        for writer, reader, _ in zip(SequenceCursor(write_cap, ctx), SequenceCursor(read_cap, ctx), range(indices)):
            agree &= writer.box_id == reader.box_id

    verified = 0
    sealed = _n(200, scale)
    for keys, _ in zip(SequenceCursor(write_cap, contexts[0]), range(sealed)):
        verified += verify(seal(keys, write_cap, entropy.randbytes(64)))

    recovered = 0
    for _ in range(100):
        cap = generate_write_cap(entropy)
        keys = keys_at(cap, contexts[0], cap.index + entropy.randrange(1, 50))
        recovered += recover_root(cap.root_private * keys.blinding, keys.blinding) == cap.root_private

    start = read_cap.index
    earlier = {k.box_id.to_bytes() for k, _ in zip(SequenceCursor(read_cap, contexts[0]), range(10))}
    advanced = advance_cap(read_cap, start + 10)
    later = {k.box_id.to_bytes() for k, _ in zip(SequenceCursor(advanced, contexts[0]), range(10))}
    try:
        advance_cap(advanced, start)
        forward_only = False
    except CapabilityRegressionError:
        forward_only = True
    forward_only &= earlier.isdisjoint(later)

    other = read_cap_from(generate_write_cap(entropy))
    first = [k.box_id.to_bytes() for k, _ in zip(SequenceCursor(read_cap, contexts[1]), range(500))]
    second = [k.box_id.to_bytes() for k, _ in zip(SequenceCursor(other, contexts[1]), range(500))]
    if fault:
        second = [b'\x00' * 4 + box_id[4:] for box_id in second]
    distinguisher = frequency_distinguisher(first, second)

    passed = (
        agree
        and verified == sealed
        and recovered == 100
        and forward_only
        and distinguisher.within_chance()
    )
    return Outcome(
        passed,
        f'agreement over {indices}x{len(contexts)} indices: {agree}; verified {verified}/{sealed}; '
        f'root recovered {recovered}/100; forward-only: {forward_only}; '
        f'distinguisher accuracy {distinguisher.accuracy:.3f} ({distinguisher.advantage_sigmas:.2f} sigma)',
    )


# Sphinx


def _route(geom, suite, hop_count: int, payload: bytes, entropy, corrupt: bool = False):
    """Wrap a packet over ``hop_count`` fresh nodes and unwrap it hop by hop.

    Returns the terminal event (or the integrity error) and the public-key operation count per hop.
    """
    keypairs = [suite.generate_keypair(entropy) for _ in range(hop_count)]
    hops = [PathHop(hash256(b'node', bytes([i])), public) for i, (_, public) in enumerate(keypairs)]
    packet = wrap(geom, PathSpec(hops, recipient_id('selftest')), payload, suite=suite, rng=entropy)
    if corrupt:
        bit = entropy.randrange(len(packet.delta) * 8)
        delta = bytearray(packet.delta)
        delta[bit // 8] ^= 1 << (bit % 8)
        packet = SphinxPacket(packet.alpha, packet.beta, packet.gamma, bytes(delta))

    instrumented = InstrumentedNike(suite) if isinstance(suite, NikeSuite) else InstrumentedKem(suite)
    operations = []
    for private, _ in keypairs:
        instrumented.reset()
        try:
            event = unwrap(geom, private, packet, suite=instrumented)
        except PayloadIntegrityError as e:
            return e, operations
        if isinstance(event, ForwardEvent):
            operations.append(instrumented.public_key_operations)
            packet = event.packet
    return event, operations


def sphinx_suite(seed: int, scale: float, fault: bool) -> Outcome:
    entropy = RandomStreams(seed).entropy('selftest/sphinx')
    payload = b'selftest payload'
    round_trips = 0
    operations: dict[str, set[int]] = {}
    for name in ('x25519', 'x25519-kem'):
        suite = get_suite(name)
        geom = geometry(suite, 9, 256)
        for hop_count in range(1, 10):
            event, ops = _route(geom, suite, hop_count, payload, entropy)
            round_trips += getattr(event, 'payload', None) == payload.ljust(geom.payload_size, b'\x00')
            operations.setdefault(name, set()).update(ops)

    trials = _n(100, scale)
    geom = geometry('x25519', 5, 256)
    suite = get_suite('x25519')
    detected = sum(
        isinstance(_route(geom, suite, 5, payload, entropy, corrupt=not fault)[0], PayloadIntegrityError)
        for _ in range(trials)
    )
    passed = (
        round_trips == 18
        and operations.get('x25519') == {2}
        and operations.get('x25519-kem') == {1}
        and detected == trials
    )
    return Outcome(
        passed,
        f'{round_trips}/18 round trips; public-key operations per hop: NIKE {sorted(operations["x25519"])}, '
        f'KEM {sorted(operations["x25519-kem"])}; corruption detected {detected}/{trials}',
    )


# Geometry and bandwidth

EXPECTED_GEOMETRY = {
    'x25519': (476, 1082),
    'x448': (500, 1130),
    'x25519-kem': (636, 1402),
    'x448-kem': (780, 1690),
    'mlkem768-x25519': (7164, 14458),
    'mlkem768-x448': (7308, 14746),
}


def geometry_suite(seed: int, scale: float, fault: bool) -> Outcome:
    hops = 6 if fault else 5
    mismatches = []
    for name, expected in EXPECTED_GEOMETRY.items():
        g = geometry(name, hops, 30000)
        if (g.header_size, g.overhead_size) != expected:
            mismatches.append(f'{name} {g.header_size}/{g.overhead_size}')
    nike, kem = geometry('x25519', hops, 30000), geometry('x25519-kem', hops, 30000)
    monotone = all(
        geometry(name, h, 30000).header_size < geometry(name, h + 1, 30000).header_size
        for name in EXPECTED_GEOMETRY
        for h in range(1, 9)
    )
    passed = not mismatches and nike.header_size < kem.header_size and monotone
    detail = 'all header and header+SURB sizes match' if not mismatches else 'mismatch: ' + ', '.join(mismatches)
    return Outcome(passed, f'{detail}; NIKE < KEM: {nike.header_size < kem.header_size}; monotone in hops: {monotone}')


def bandwidth_suite(seed: int, scale: float, fault: bool) -> Outcome:
    report = bandwidth_report(2.0 if fault else 2.5, 'x25519', 5, 30000)
    per_second_ok = abs(report.bytes_per_s - 77_000) / 77_000 <= 0.05
    per_day_ok = abs(report.gigabytes_per_day - 6.7) / 6.7 <= 0.05
    return Outcome(
        per_second_ok and per_day_ok,
        f'{report.bytes_per_s:.0f} B/s, {report.gigabytes_per_day:.2f} GB/day, '
        f'payload efficiency {report.payload_efficiency:.1%}',
    )


# Scenarios


def last_hop_suite(seed: int, scale: float, fault: bool) -> Outcome:
    leak = run_simulation(load_scenario('loopix-leak'), seed).summary.last_hop
    control_name = 'loopix-leak' if fault else 'echomix-leak-control'
    control = run_simulation(load_scenario(control_name), seed).summary.last_hop
    passed = leak.detected and leak.target_z > 4 and not control.detected and control.max_abs_z < 3
    return Outcome(
        passed,
        f'loopix target z={leak.target_z:.2f}; {control_name} max |z|={control.max_abs_z:.2f}',
    )


def heartbeat_suite(seed: int, scale: float, fault: bool) -> Outcome:
    scenario = load_scenario('heartbeat-fault')
    if fault:
        scenario = scenario.model_copy(update={'faults': []})
    faulty = {f'{f.src}->{f.dst}' for f in scenario.faults} or {'L1-0->L2-1'}
    reports = run_simulation(scenario, seed).summary.link_ratings
    collapsed = {link for report in reports for link in report.collapsed}
    passed = bool(reports) and collapsed == faulty
    return Outcome(passed, f'{len(reports)} epochs rated; collapsed links: {sorted(collapsed) or "none"}')


def pigeonhole_suite(seed: int, scale: float, fault: bool) -> Outcome:
    backfill = backfill_after_retention(seed, stale_reader=fault)
    trials = all_or_nothing_sweep(_n(100, scale, minimum=5), seed)
    clean = sum(t.all_or_nothing for t in trials)
    acked = sum(t.acked for t in trials)
    passed = backfill.passed and clean == len(trials)
    return Outcome(
        passed,
        f'backfill recovered {len(backfill.recovered)}/{len(backfill.expected)}, temporary channel tombstoned: '
        f'{backfill.temp_tombstoned}; all-or-nothing in {clean}/{len(trials)} fault schedules ({acked} acked)',
    )


SUITES: dict[str, Suite] = {
    'erlang': erlang_suite,
    'coupling': coupling_suite,
    'coupon': coupon_suite,
    'sharding': sharding_suite,
    'bacap': bacap_suite,
    'sphinx': sphinx_suite,
    'geometry': geometry_suite,
    'bandwidth': bandwidth_suite,
    'last-hop': last_hop_suite,
    'heartbeat': heartbeat_suite,
    'pigeonhole': pigeonhole_suite,
}


def run_suite(name: str, seed: int, scale: float = 1.0, fault: bool = False) -> SuiteVerdict:
    started = time.perf_counter()
    try:
        outcome = SUITES[name](seed, scale, fault)
    except WorkbenchError as e:
        logger.warning(f'Suite {name} raised {type(e).__name__}: {e}')
        outcome = Outcome(False, f'{type(e).__name__}: {e}')
    seconds = time.perf_counter() - started
    logger.info(f'Suite {name}: {"pass" if outcome.passed else "FAIL"} in {seconds:.1f}s')
    return SuiteVerdict(suite=name, passed=outcome.passed, detail=outcome.detail, seconds=seconds)


def run_selftest(
    seed: int,
    suites: Iterable[str] | None = None,
    faults: Iterable[str] = (),
    scale: float = 1.0,
) -> SelftestReport:
    names = list(suites) if suites else list(SUITES)
    unknown = [n for n in [*names, *faults] if n not in SUITES]
    if unknown:
        raise ConfigError(f'unknown suite(s) {", ".join(unknown)}; known: {", ".join(SUITES)}', field='suite')
    faulted = set(faults)
    verdicts = [run_suite(name, seed, scale, name in faulted) for name in names]
    return SelftestReport(seed=seed, passed=all(v.passed for v in verdicts), verdicts=verdicts)
