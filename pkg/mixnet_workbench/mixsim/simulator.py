"""Discrete-event simulation of the network in echomix or loopix mode.

Each packet is one simpy process walking its route. Every node after the origin holds it for an
exponential delay before putting it on the next link, where the observer records it. Entity draws come
from named substreams so that runs are reproducible and adding an entity does not shift other draws.
"""

import logging
from collections import defaultdict, deque
from dataclasses import dataclass
from itertools import count

import numpy as np
import simpy

from mixnet_workbench.bacap import Context, SequenceCursor, generate_write_cap
from mixnet_workbench.crypto_core import CryptoError
from mixnet_workbench.dto.reports import SimulationSummary
from mixnet_workbench.dto.scenario import ScenarioConfig
from mixnet_workbench.mixsim.coupling import SELECTORS, AppRequest, always_app, coupling_mux, destination_for_box, uniform_decoys
from mixnet_workbench.mixsim.errors import ConfigError
from mixnet_workbench.mixsim.heartbeat import FaultSet, LinkFault, LinkHealth, heartbeat_route
from mixnet_workbench.mixsim.latency import coupon_bound, coverage_rate, rtt_distribution
from mixnet_workbench.mixsim.observer import (
    LinkLog,
    MemorylessnessTracker,
    PacketLedger,
    check_wire_uniformity,
    gpa_last_hop_test,
    link_coverage,
)
from mixnet_workbench.mixsim.rng import Draws, RandomStreams
from mixnet_workbench.mixsim.topology import MIX_LAYERS, Topology, client_name
from mixnet_workbench.pki import PkiView
from mixnet_workbench.sphinx import GeometryError, geometry
from mixnet_workbench.stats import category_counts, chi_square_uniform

logger = logging.getLogger(__name__)

ECHO_DELAYS = 2 * (MIX_LAYERS + 1) + 1
LOOPIX_DELAYS = MIX_LAYERS + 1


@dataclass
class SimulationResult:
    summary: SimulationSummary
    log: LinkLog
    ledger: PacketLedger
    latencies: dict[str, np.ndarray]
    destinations: dict[int, list[int]]
    topology: Topology
    health: LinkHealth | None
    memoryless: MemorylessnessTracker
    pki: PkiView


class Simulation:
    def __init__(self, scenario: ScenarioConfig, seed: int | None = None, pki: PkiView | None = None):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.env = simpy.Environment()
        self.streams = RandomStreams(self.seed)
        self.topology = Topology.from_config(scenario.mode, scenario.topology)
        try:
            self.geometry = geometry(scenario.mixing.suite, scenario.mixing.max_hops, scenario.mixing.payload_size)
        except (CryptoError, GeometryError) as e:
            raise ConfigError(str(e), field='mixing.suite') from e
        self.packet_size = self.geometry.packet_size
        self.mu = scenario.mixing.mu
        self.pki = pki or PkiView(scenario.heartbeat.epoch_seconds)

        self.log = LinkLog()
        self.ledger = PacketLedger()
        self.memoryless = MemorylessnessTracker()
        self.faults = FaultSet(
            [LinkFault.from_config(f) for f in scenario.faults], Draws(self.streams.generator('faults'))
        )
        self.health = (
            LinkHealth(scenario.heartbeat.timeout, scenario.heartbeat.collapse_threshold)
            if scenario.heartbeat.enabled
            else None
        )
        if self.health is not None and scenario.mode != 'echomix':
            raise ConfigError('heartbeats are only simulated in echomix mode', field='heartbeat.enabled')

        self._pids = count()
        self._delays: dict[str, Draws] = {}
        self.queues: dict[str, dict[int, float]] = {node: {} for node in self.topology.mix_nodes}
        self.latencies: dict[str, list[float]] = defaultdict(list)
        self.online = [True] * self.topology.clients
        self.destinations: dict[int, list[int]] = {i: [] for i in range(self.topology.clients)}
        self.app_queues: dict[int, deque[AppRequest]] = {i: deque() for i in range(self.topology.clients)}
        self._cursors: dict[int, SequenceCursor] = {}

    # Packet movement

    def _delay(self, node: str) -> float:
        draws = self._delays.get(node)
        if draws is None:
            draws = self._delays[node] = Draws(self.streams.generator(f'{node}/delay'))
        return draws.exponential(self.mu)

    def _launch(self, kind: str, route: list[str], on_delivery=None) -> int:
        pid = next(self._pids)
        self.ledger.emit(pid, kind)
        self.env.process(self._journey(pid, kind, route, on_delivery))
        return pid

    def _journey(self, pid: int, kind: str, route: list[str], on_delivery):
        start = self.env.now
        for i in range(len(route) - 1):
            node = route[i]
            if i > 0:
                delay = self._delay(node)
                queue = self.queues.get(node)
                if queue is not None:
                    queue[pid] = self.env.now + delay
                yield self.env.timeout(delay)
                if queue is not None:
                    del queue[pid]
            src, dst = node, route[i + 1]
            self.topology.check_link(src, dst)
            if self.faults.drops(src, dst, self.env.now):
                self.ledger.drop(pid, f'fault {src}->{dst}')
                return
            self.log.record(self.env.now, src, dst, self.packet_size)
        self.ledger.deliver(pid)
        self.latencies[kind].append(self.env.now - start)
        if on_delivery is not None:
            on_delivery(pid)

    def _picker(self, name: str):
        draws = Draws(self.streams.generator(name))
        return lambda nodes: nodes[draws.index(len(nodes))]

    # Clients

    def _box_destination(self, client: int) -> int:
        cursor = self._cursors.get(client)
        if cursor is None:
            name = client_name(client)
            cap = generate_write_cap(self.streams.entropy(f'{name}/bacap'))
            ctx = Context.from_public_value(self.streams.entropy(f'{name}/wsrv').randbytes(32))
            cursor = self._cursors[client] = SequenceCursor(cap, ctx)
        return destination_for_box(next(cursor).box_id.to_bytes(), self.topology.services)

    def _app_request(self, client: int) -> AppRequest:
        if self.scenario.traffic.broken_client and client == 0:
            return AppRequest(0, pseudorandom=False)
        return AppRequest(self._box_destination(client))

    def _client(self, i: int):
        traffic = self.scenario.traffic
        topology = self.topology
        name = client_name(i)
        timing = Draws(self.streams.generator(f'{name}/emit'))
        app_draws = Draws(self.streams.generator(f'{name}/app'))
        pick = self._picker(f'{name}/route')
        queue = self.app_queues[i]
        history = self.destinations[i]
        mean_gap = 1.0 / traffic.client_rate

        if topology.mode == 'echomix':
            decoys = uniform_decoys(self.streams.generator(f'{name}/decoy'), topology.services)
            selector = SELECTORS[traffic.selector]
            strict = not (traffic.broken_client and i == 0)
            gateway = topology.gateway_nodes[i % topology.gateways]
        else:
            decoys = uniform_decoys(self.streams.generator(f'{name}/decoy'), topology.providers)
            selector, strict = always_app, False
            provider = topology.provider_of(i)

        while True:
            yield self.env.timeout(timing.exponential(mean_gap))
            if not self.online[i]:
                continue
            if traffic.app_fraction and topology.mode == 'echomix' and app_draws.uniform() < traffic.app_fraction:
                queue.append(self._app_request(i))
            destination = coupling_mux(decoys, queue, selector, history, strict)
            mixes = [pick(layer) for layer in topology.layers]
            if topology.mode == 'echomix':
                back = [pick(layer) for layer in reversed(topology.layers)]
                service = topology.service_nodes[destination]
                route = [name, *topology.echo_route(gateway, mixes + back, service), name]
                self._launch('echo', route)
            else:
                self._launch('forward', [name, provider, *mixes, f'prov-{destination}'])

    def _conversation(self):
        conversation = self.scenario.conversation
        sender, receiver = conversation.sender, conversation.receiver
        receiver_provider = int(self.topology.provider_of(receiver).split('-')[1])
        while True:
            yield self.env.timeout(conversation.interval)
            if self.topology.mode == 'echomix':
                request = AppRequest(self._box_destination(sender))
            else:
                request = AppRequest(receiver_provider, pseudorandom=False)
            self.app_queues[sender].append(request)

    def _churn(self, i: int):
        churn = self.scenario.churn
        draws = Draws(self.streams.generator(f'{client_name(i)}/churn'))
        while True:
            yield self.env.timeout(draws.exponential(churn.mean_online))
            self.online[i] = False
            logger.debug(f'{client_name(i)} offline at {self.env.now:.1f}s')
            yield self.env.timeout(draws.exponential(churn.mean_offline))
            self.online[i] = True

    # Nodes

    def gateway_decoy_rate(self, gateway: int) -> float:
        traffic = self.scenario.traffic
        topology = self.topology
        rate = 1.0 / self.mu
        match traffic.gateway_decoys:
            case 'off':
                return 0.0
            case 'coupon':
                target = coupon_bound(topology.layer_width, topology.gateways, rate).per_second
            case 'coverage':
                target = coverage_rate(
                    topology.layer_width, topology.gateways, rate, traffic.coverage_target
                ).per_gateway_per_second
        clients_here = len(range(gateway, topology.clients, topology.gateways))
        return max(0.0, target - clients_here * traffic.client_rate)

    def _gateway(self, j: int, rate: float):
        gateway = self.topology.gateway_nodes[j]
        timing = Draws(self.streams.generator(f'{gateway}/decoy'))
        pick = self._picker(f'{gateway}/decoy-route')
        while True:
            yield self.env.timeout(timing.exponential(1.0 / rate))
            mixes = [pick(layer) for layer in self.topology.layers]
            self._launch('decoy', [gateway, *mixes, pick(self.topology.service_nodes)])

    def _heartbeat(self, node: str):
        timing = Draws(self.streams.generator(f'{node}/heartbeat'))
        pick = self._picker(f'{node}/heartbeat-route')
        mean_gap = 1.0 / self.scenario.heartbeat.rate
        while True:
            yield self.env.timeout(timing.exponential(mean_gap))
            route = heartbeat_route(self.topology, node, pick)
            pid = self._launch('heartbeat', route, on_delivery=self.health.returned)
            self.health.sent(pid, self.env.now, route)

    def _epochs(self):
        epoch = 0
        while True:
            yield self.env.timeout(self.scenario.heartbeat.epoch_seconds)
            self.health.close_epoch(epoch, self.env.now, self.pki)
            epoch += 1

    def _snapshots(self):
        draws = Draws(self.streams.generator('observer/snapshots'))
        mixes = self.topology.mix_nodes
        mean_gap = self.scenario.duration / self.scenario.observer.memoryless_snapshots
        while True:
            yield self.env.timeout(draws.exponential(mean_gap))
            queue = self.queues[mixes[draws.index(len(mixes))]]
            if len(queue) < 2:
                continue
            # Insertion order is arrival order.
            self.memoryless.record(len(queue), int(np.argmin(list(queue.values()))))

    # Run

    def _start(self):
        scenario = self.scenario
        topology = self.topology
        if scenario.traffic.client_rate > 0:
            for i in range(topology.clients):
                self.env.process(self._client(i))
        if scenario.churn.enabled:
            for i in range(topology.clients):
                self.env.process(self._churn(i))
        if scenario.conversation is not None:
            self.env.process(self._conversation())
        if topology.mode == 'echomix':
            for j in range(topology.gateways):
                rate = self.gateway_decoy_rate(j)
                if rate > 0:
                    self.env.process(self._gateway(j, rate))
        if self.health is not None:
            for node in topology.gateway_nodes + topology.mix_nodes + topology.service_nodes:
                self.env.process(self._heartbeat(node))
            self.env.process(self._epochs())
        if scenario.observer.memoryless_snapshots:
            self.env.process(self._snapshots())

    def run(self) -> SimulationResult:
        scenario = self.scenario
        logger.info(f'Simulating {scenario.name!r} ({scenario.mode}) for {scenario.duration:.0f}s with seed {self.seed}')
        self._start()
        self.env.run(until=scenario.duration)
        self.ledger.check()
        check_wire_uniformity(self.log, self.packet_size)
        summary = self._summarize()
        logger.info(
            f'Simulation {scenario.name!r} done: {summary.emitted} emitted, {summary.delivered} delivered, '
            f'{summary.dropped} dropped, {summary.in_flight} in flight'
        )
        return SimulationResult(
            summary=summary,
            log=self.log,
            ledger=self.ledger,
            latencies={kind: np.asarray(v) for kind, v in self.latencies.items()},
            destinations=self.destinations,
            topology=self.topology,
            health=self.health,
            memoryless=self.memoryless,
            pki=self.pki,
        )

    def _summarize(self) -> SimulationSummary:
        scenario = self.scenario
        topology = self.topology
        echomix = topology.mode == 'echomix'
        trip_kind, trip_hops = ('echo', ECHO_DELAYS) if echomix else ('forward', LOOPIX_DELAYS)
        trips = self.latencies.get(trip_kind, [])

        categories = range(topology.services if echomix else topology.providers)
        all_destinations = [d for history in self.destinations.values() for d in history]
        emission_p = worst_p = None
        if len(all_destinations) >= 5 * len(categories) and len(categories) > 1:
            emission_p = chi_square_uniform(category_counts(all_destinations, categories)).pvalue
            per_client = [
                chi_square_uniform(category_counts(history, categories)).pvalue
                for history in self.destinations.values()
                if len(history) >= 5 * len(categories)
            ]
            worst_p = min(per_client) if per_client else None

        coverage = None
        if topology.mode == 'echomix':
            window = scenario.observer.coverage_window or self.mu
            warmup = min(10 * self.mu, scenario.duration / 4)
            coverage = link_coverage(self.log, topology.inter_layer_links(1), window, warmup, scenario.duration)

        memoryless = self.memoryless.result()
        target = None
        if scenario.conversation is not None and not echomix:
            target = topology.provider_of(scenario.conversation.receiver)

        return SimulationSummary(
            scenario=scenario.name,
            mode=topology.mode,
            seed=self.seed,
            duration_s=scenario.duration,
            packet_bytes=self.packet_size,
            emitted=len(self.ledger.emitted),
            delivered=len(self.ledger.delivered),
            dropped=len(self.ledger.dropped),
            in_flight=self.ledger.in_flight,
            drop_causes=self.ledger.drop_causes(),
            link_observations=len(self.log),
            round_trips=len(trips),
            mean_rtt_s=float(np.mean(trips)) if trips else None,
            analytic_rtt_s=rtt_distribution(trip_hops, 1.0 / self.mu).mean,
            emission_uniformity_p=emission_p,
            worst_client_uniformity_p=worst_p,
            link_coverage=coverage,
            memorylessness_p=memoryless.pvalue if memoryless else None,
            last_hop=gpa_last_hop_test(topology.mode, self.log, topology, target),
            link_ratings=list(self.health.reports) if self.health else [],
        )


def run(scenario: ScenarioConfig, seed: int | None = None, pki: PkiView | None = None) -> SimulationResult:
    return Simulation(scenario, seed, pki).run()
