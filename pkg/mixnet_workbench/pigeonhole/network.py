"""A simulated storage network: clients, couriers and replicas as simpy actors.

Clients reach couriers over the mix network, modelled as Erlang-distributed latency. Couriers and
replicas talk over constant-rate links that send in fixed slots; unused slots count as dummies. Every
actor handles one inbox message at a time.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field

import simpy

from mixnet_workbench.bacap import BacapBox, Context, WriteCap, generate_write_cap
from mixnet_workbench.config import Settings, get_settings
from mixnet_workbench.crypto_core import X25519Nike, hash256
from mixnet_workbench.mixsim.latency import ErlangLatency
from mixnet_workbench.mixsim.rng import Draws, RandomStreams
from mixnet_workbench.pigeonhole.channel import ChannelReader, ChannelState, MESSAGE_HEADER_SIZE
from mixnet_workbench.pigeonhole.courier import CacheEntry, CourierState, Decision
from mixnet_workbench.pigeonhole.envelopes import (
    CourierEnvelope,
    EnvelopeKind,
    ReplyStatus,
    open_reply,
    seal_envelope,
    write_envelope_size,
)
from mixnet_workbench.pigeonhole.errors import BoxRejectedError, EnvelopeError, PigeonholeError
from mixnet_workbench.pigeonhole.replica import COPY_ID_SIZE, Forward, Replica
from mixnet_workbench.pigeonhole.sharding import ReplicaEntry, ShardMap
from mixnet_workbench.pigeonhole.store import ReplicaStore
from mixnet_workbench.pki import SECONDS_PER_WEEK, PkiView, ReplicaDescriptor, ReplicaSecrets

logger = logging.getLogger(__name__)

ACK = b'ACK'
REQUEST_HOPS = 5
REPLY_HOPS = 4


# Faults


@dataclass(frozen=True)
class ReplicaOutage:
    replica: str
    start: float
    end: float


@dataclass(frozen=True)
class LinkDrop:
    src: str
    dst: str
    start: float
    end: float
    probability: float = 1.0


@dataclass
class FaultSchedule:
    outages: list[ReplicaOutage] = field(default_factory=list)
    drops: list[LinkDrop] = field(default_factory=list)

    def replica_down(self, replica: str, now: float) -> bool:
        return any(o.replica == replica and o.start <= now < o.end for o in self.outages)

    def link_drops(self, src: str, dst: str, now: float, draws: Draws) -> bool:
        for drop in self.drops:
            if drop.src in (src, '*') and drop.dst in (dst, '*') and drop.start <= now < drop.end:
                if drop.probability >= 1.0 or draws.uniform() < drop.probability:
                    return True
        return False

    @property
    def quiet_after(self) -> float:
        ends = [o.end for o in self.outages] + [d.end for d in self.drops]
        return max(ends, default=0.0)

    @classmethod
    def randomized(cls, draws: Draws, replicas: list[str], couriers: list[str], horizon: float) -> 'FaultSchedule':
        """A few transient replica outages and courier/replica link drops inside ``[0, horizon)``."""
        outages = []
        for _ in range(1 + draws.index(3)):
            start = draws.uniform() * horizon
            outages.append(ReplicaOutage(replicas[draws.index(len(replicas))], start, start + 5 + 60 * draws.uniform()))
        drops = []
        for _ in range(draws.index(4)):
            start = draws.uniform() * horizon
            ends = [*couriers, *replicas]
            src = ends[draws.index(len(ends))]
            dst = replicas[draws.index(len(replicas))]
            drops.append(LinkDrop(src, dst, start, start + 5 + 60 * draws.uniform(), 0.5 + 0.5 * draws.uniform()))
        return cls(outages, drops)


# Messages


@dataclass(frozen=True)
class ClientRequest:
    client: str
    payload: bytes
    surb_id: bytes


@dataclass(frozen=True)
class CopyRequest:
    client: str
    temp_write_cap: bytes
    context: bytes
    count: int
    surb_id: bytes

    @property
    def digest(self) -> bytes:
        return hash256(b'pigeonhole/copy-request', self.temp_write_cap, self.context, self.count.to_bytes(4, 'big'))


@dataclass(frozen=True)
class SurbDelivery:
    surb_id: bytes
    payload: bytes


@dataclass(frozen=True)
class ReplicaRequest:
    op: str
    courier: str
    request_ref: int
    envelope: bytes = b''
    copy_id: bytes = b''


@dataclass(frozen=True)
class ReplicaResponse:
    replica: str
    request_ref: int
    payload: bytes
    ok: bool = True


@dataclass(frozen=True)
class ForwardBox:
    src: str
    outbox_id: bytes
    box: bytes


@dataclass(frozen=True)
class ForwardAck:
    final: str
    outbox_id: bytes


# Links


class ConstantRateLink:
    """Sends one message per slot of ``1/rate`` seconds; slots without a message carry a dummy."""

    def __init__(self, network: 'PigeonholeNetwork', src: str, dst: str, rate: float, latency: float = 0.005):
        self.network = network
        self.src = src
        self.dst = dst
        self.rate = rate
        self.latency = latency
        self.real = 0
        self.dropped = 0
        self._next_slot = 0.0

    def send(self, message):
        env = self.network.env
        slot = max(math.ceil(env.now * self.rate) / self.rate, self._next_slot)
        self._next_slot = slot + 1.0 / self.rate
        self.real += 1
        env.process(self._carry(slot - env.now + self.latency, message))

    def _carry(self, wait: float, message):
        yield self.network.env.timeout(wait)
        if self.network.faults.link_drops(self.src, self.dst, self.network.env.now, self.network.fault_draws):
            self.dropped += 1
            return
        self.network.deliver(self.dst, message)

    def dummies(self, now: float) -> int:
        return max(0, math.floor(now * self.rate) - self.real)


# Actors


class _Actor:
    def __init__(self, network: 'PigeonholeNetwork', name: str):
        self.network = network
        self.env = network.env
        self.name = name
        self.inbox = simpy.Store(self.env)
        self.env.process(self._loop())

    def _loop(self):
        while True:
            message = yield self.inbox.get()
            if self.available():
                self.handle(message)

    def available(self) -> bool:
        return True

    def handle(self, message): ...


class ReplicaActor(_Actor):
    def __init__(self, network: 'PigeonholeNetwork', replica: Replica):
        self.replica = replica
        self._acked: dict[bytes, set[str]] = defaultdict(set)
        self._delivering: set[bytes] = set()
        super().__init__(network, replica.name)
        for outage in network.faults.outages:
            if outage.replica == self.name:
                self.env.process(self._outage(outage))

    def available(self) -> bool:
        return not self.network.faults.replica_down(self.name, self.env.now)

    def _outage(self, outage: ReplicaOutage):
        yield self.env.timeout(max(0.0, outage.start - self.env.now))
        logger.warning(f'{self.name} is down from {outage.start:.1f}s to {outage.end:.1f}s')
        self.replica.crash()
        yield self.env.timeout(outage.end - self.env.now)
        for duty in self.replica.outbox():
            self._start_delivery(duty)

    def _start_delivery(self, duty: Forward):
        if duty.outbox_id not in self._delivering:
            self._delivering.add(duty.outbox_id)
            self.env.process(self._deliver(duty))

    def _respond(self, request: ReplicaRequest, payload: bytes, ok: bool = True):
        self.network.link(self.name, request.courier).send(ReplicaResponse(self.name, request.request_ref, payload, ok))

    def handle(self, message):
        match message:
            case ReplicaRequest(op='write'):
                try:
                    duty = self.replica.accept_write(CourierEnvelope.from_bytes(message.envelope))
                except (EnvelopeError, BoxRejectedError) as e:
                    logger.warning(f'{self.name} rejected a write: {e}')
                    self._respond(message, b'', ok=False)
                    return
                self._respond(message, ACK)
                self._start_delivery(duty)
            case ReplicaRequest(op='read'):
                try:
                    reply = self.replica.serve_read(
                        CourierEnvelope.from_bytes(message.envelope), message.courier, message.request_ref
                    )
                except EnvelopeError as e:
                    logger.warning(f'{self.name} rejected a read: {e}')
                    self._respond(message, b'', ok=False)
                    return
                self._respond(message, reply.reply)
            case ReplicaRequest(op='stage'):
                try:
                    self.replica.stage_copy(message.copy_id, CourierEnvelope.from_bytes(message.envelope))
                except (EnvelopeError, BoxRejectedError) as e:
                    logger.warning(f'{self.name} refused to stage a copied write: {e}')
                    self._respond(message, b'', ok=False)
                    return
                self._respond(message, ACK)
            case ReplicaRequest(op='commit'):
                for duty in self.replica.commit_copy(message.copy_id):
                    self._start_delivery(duty)
                self._respond(message, ACK)
            case ReplicaRequest(op='discard'):
                self.replica.discard_copy(message.copy_id)
            case ForwardBox():
                self._store_final(BacapBox.from_bytes(message.box))
                self.network.link(self.name, message.src).send(ForwardAck(self.name, message.outbox_id))
            case ForwardAck():
                self._acked[message.outbox_id].add(message.final)

    def _store_final(self, box: BacapBox):
        try:
            _, fired = self.replica.store_final(box)
        except BoxRejectedError as e:
            logger.warning(f'{self.name}: {e}')
            return
        for pending in fired:
            self.env.process(self._fire(pending))

    def _fire(self, pending):
        yield self.env.timeout(pending.delay)
        if not self.available():
            return
        reply = self.replica.fire(pending)
        self.network.fired_delays.append(pending.delay)
        self.network.link(self.name, pending.courier).send(ReplicaResponse(self.name, reply.request_ref, reply.reply))

    def _deliver(self, duty: Forward):
        """Push a box to its final replicas until each acknowledges it."""
        names = {self.network.replica_name(rid) for rid in duty.finals}
        if self.name in names:
            self._store_final(duty.box)
            names.discard(self.name)
        while names:
            if self.available():
                for final in sorted(names):
                    self.network.link(self.name, final).send(ForwardBox(self.name, duty.outbox_id, duty.box.to_bytes()))
            yield self.env.timeout(self.network.retry_interval)
            names -= self._acked[duty.outbox_id]
        self._acked.pop(duty.outbox_id, None)
        self._delivering.discard(duty.outbox_id)
        self.replica.delivered(duty.outbox_id)


class CourierActor(_Actor):
    def __init__(self, network: 'PigeonholeNetwork', name: str):
        self.state = CourierState(name, network.settings.courier_cache_ttl)
        self.entropy = network.streams.entropy(f'{name}/crypto')
        self.draws = Draws(network.streams.generator(f'{name}/choices'))
        self._refs = 0
        self._waiters: dict[int, simpy.Event] = {}
        self._ref_digest: dict[int, bytes] = {}
        self._surb_clients: dict[bytes, str] = {}
        super().__init__(network, name)

    def _next_ref(self) -> int:
        self._refs += 1
        return self._refs

    def handle(self, message):
        match message:
            case ClientRequest():
                self._client_request(message)
            case CopyRequest():
                self._copy_request(message)
            case ReplicaResponse():
                self._replica_response(message)

    def _answer(self, surb_id: bytes, payload: bytes):
        client = self._surb_clients.pop(surb_id, None)
        if client is not None:
            self.network.via_mixnet(client, SurbDelivery(surb_id, payload), REPLY_HOPS)

    def _client_request(self, request: ClientRequest):
        try:
            envelope = CourierEnvelope.from_bytes(request.payload)
        except EnvelopeError as e:
            logger.warning(f'{self.name} dropped a malformed envelope: {e}')
            return
        self._surb_clients[request.surb_id] = request.client
        decision, cached = self.state.accept(envelope, request.surb_id, self.env.now)
        match decision:
            case Decision.REPLY:
                self._answer(request.surb_id, cached)
            case Decision.FORWARD:
                self.env.process(self._serve(envelope))

    def _copy_request(self, request: CopyRequest):
        self._surb_clients[request.surb_id] = request.client
        digest = request.digest
        entry = self.state.cache.get(digest)
        if entry is not None and entry.response is not None:
            self._answer(request.surb_id, entry.response)
        elif entry is not None:
            entry.waiting.append(request.surb_id)
        else:
            self.state.cache[digest] = CacheEntry(
                EnvelopeKind.WRITE, (), self.env.now + self.state.cache_ttl, waiting=[request.surb_id]
            )
            self.env.process(self._copy(request))

    def _replica_response(self, response: ReplicaResponse):
        waiter = self._waiters.pop(response.request_ref, None)
        if waiter is not None and not waiter.triggered:
            waiter.succeed(response)
            return
        # A late response, typically a pending read firing after the first reply.
        digest = self._ref_digest.get(response.request_ref)
        if digest is not None and response.ok:
            for surb_id in self.state.record_response(digest, response.payload, self.env.now):
                self._answer(surb_id, response.payload)

    def _ask(self, replica: str, op: str, envelope: bytes = b'', copy_id: bytes = b''):
        """Send one request to a replica and wait for its response or the timeout; returns the response or None."""
        ref = self._next_ref()
        event = self.env.event()
        self._waiters[ref] = event
        self.network.link(self.name, replica).send(ReplicaRequest(op, self.name, ref, envelope, copy_id))
        result = yield event | self.env.timeout(self.network.replica_timeout)
        self._waiters.pop(ref, None)
        response = result[event] if event in result else None
        return ref, (response if response is not None and response.ok else None)

    def _serve(self, envelope: CourierEnvelope):
        digest = envelope.digest
        payload = envelope.to_bytes()
        targets = [self.network.replica_name(rid) for rid in envelope.replica_ids]
        response = None
        if envelope.kind is EnvelopeKind.WRITE:
            refs = [self._next_ref() for _ in targets]
            events = [self.env.event() for _ in targets]
            for ref, event, target in zip(refs, events, targets):
                self._waiters[ref] = event
                self.network.link(self.name, target).send(ReplicaRequest('write', self.name, ref, payload))
            yield self.env.any_of([*events, self.env.timeout(self.network.replica_timeout)])
            acked = [e.value for e in events if e.triggered and e.value.ok]
            for ref in refs:
                self._waiters.pop(ref, None)
            response = acked[0] if acked else None
        else:
            for target in targets:
                ref, response = yield from self._ask(target, 'read', payload)
                if response is not None:
                    self._ref_digest[ref] = digest
                    break
        if response is None:
            logger.warning(f'{self.name}: no replica answered a {envelope.kind.name.lower()} request')
            self.state.forget(digest)
            return
        for surb_id in self.state.record_response(digest, response.payload, self.env.now):
            self._answer(surb_id, response.payload)

    # Copy command

    def _fetch(self, box_id: bytes):
        """Read one box of the temporary channel as a client would; None when it cannot be found."""
        shard = self.network.shard_map.select(box_id)
        for _ in range(self.network.copy_read_attempts):
            envelope, dek = self.network.read_envelope(box_id, shard, self.entropy)
            for rid in shard:
                _, response = yield from self._ask(self.network.replica_name(rid), 'read', envelope.to_bytes())
                if response is None:
                    continue
                status, box = open_reply(dek, response.payload)
                if status is ReplyStatus.FOUND:
                    return box
            yield self.env.timeout(self.network.retry_interval)
        return None

    def _write_box(self, box: BacapBox):
        """Write one box through fresh intermediates; False once ``stage_attempts`` rounds went unanswered."""
        for attempt in range(self.network.stage_attempts):
            if attempt:
                yield self.env.timeout(self.network.retry_interval)
            envelope = self.network.write_envelope(box, self.network.pick_intermediates(self.draws), self.entropy)
            targets = [self.network.replica_name(rid) for rid in envelope.replica_ids]
            for target in targets:
                _, response = yield from self._ask(target, 'write', envelope.to_bytes())
                if response is not None:
                    return True
        return False

    def _copy(self, request: CopyRequest):
        digest = request.digest
        copy_id = self.entropy.randbytes(COPY_ID_SIZE)
        cap = WriteCap.from_bytes(request.temp_write_cap)
        reader = ChannelReader(cap.read_cap(), Context(request.context))
        items: list[CourierEnvelope] = []
        already_done = False
        for _ in range(request.count):
            box = yield from self._fetch(reader.box_id)
            if box is None:
                logger.warning(f'{self.name}: copy {copy_id.hex()[:8]} aborted, temporary box unavailable')
                self.state.forget(digest)
                return
            if box.is_tombstone:
                already_done = True
                break
            items.append(CourierEnvelope.from_bytes(reader.accept(box).body))

        if not already_done:
            committed = yield from self._two_phase(copy_id, items)
            if not committed:
                self.state.forget(digest)
                return
            temp = ChannelState(cap, Context(request.context), 0)
            for index in range(cap.index, cap.index + request.count):
                written = yield from self._write_box(temp.tombstone(index))
                if not written:
                    logger.warning(f'{self.name}: copy {copy_id.hex()[:8]} could not tombstone box {index}')
                    self.state.forget(digest)
                    return
            self.state.copies_executed += 1
            self.state.items_copied += len(items)
            logger.info(f'{self.name} copied {len(items)} writes and tombstoned the temporary channel')
        for surb_id in self.state.record_response(digest, ACK, self.env.now):
            self._answer(surb_id, ACK)

    def _two_phase(self, copy_id: bytes, items: list[CourierEnvelope]):
        """Stage every item at each of its intermediate replicas, then commit; abort if staging fails."""
        involved = sorted({self.network.replica_name(rid) for item in items for rid in item.replica_ids})
        for attempt in range(self.network.stage_attempts):
            pending = [(item, self.network.replica_name(rid)) for item in items for rid in item.replica_ids]
            refs = {}
            for item, replica in pending:
                ref = self._next_ref()
                refs[ref] = self.env.event()
                self._waiters[ref] = refs[ref]
                self.network.link(self.name, replica).send(
                    ReplicaRequest('stage', self.name, ref, item.to_bytes(), copy_id)
                )
            yield self.env.any_of([self.env.all_of(list(refs.values())), self.env.timeout(self.network.replica_timeout)])
            for ref in refs:
                self._waiters.pop(ref, None)
            if all(e.triggered and e.value.ok for e in refs.values()):
                break
        else:
            logger.warning(f'{self.name}: staging of copy {copy_id.hex()[:8]} failed; discarding')
            for replica in involved:
                self.network.link(self.name, replica).send(ReplicaRequest('discard', self.name, 0, copy_id=copy_id))
            return False

        # Past this point the copy is decided; retry commits until every item has a committed replica.
        committed: set[str] = set()
        pairs = [{self.network.replica_name(rid) for rid in item.replica_ids} for item in items]
        while not all(pair & committed for pair in pairs):
            for replica in involved:
                if replica in committed:
                    continue
                _, response = yield from self._ask(replica, 'commit', copy_id=copy_id)
                if response is not None:
                    committed.add(replica)
            if not all(pair & committed for pair in pairs):
                yield self.env.timeout(self.network.retry_interval)
        for replica in involved:
            if replica not in committed:
                self.network.link(self.name, replica).send(ReplicaRequest('commit', self.name, 0, copy_id=copy_id))
        return True


class PigeonholeClient(_Actor):
    def __init__(self, network: 'PigeonholeNetwork', name: str):
        self.entropy = network.streams.entropy(f'{name}/crypto')
        self.draws = Draws(network.streams.generator(f'{name}/choices'))
        self._surbs: dict[bytes, simpy.Event] = {}
        self.acks_received = 0
        super().__init__(network, name)

    def handle(self, message):
        if isinstance(message, SurbDelivery):
            event = self._surbs.pop(message.surb_id, None)
            if event is not None and not event.triggered:
                event.succeed(message.payload)

    def _pick_courier(self, avoid: str | None = None) -> str:
        couriers = [c for c in self.network.courier_names if c != avoid] or self.network.courier_names
        return couriers[self.draws.index(len(couriers))]

    def _request(self, make_message):
        """Send with a fresh SURB each attempt; the courier rotates after the configured number of retries."""
        courier = self._pick_courier()
        rotation = self.network.settings.courier_rotation_retries
        for attempt in range(self.network.client_attempts):
            if attempt and attempt % rotation == 0:
                courier = self._pick_courier(avoid=courier)
                logger.warning(f'{self.name} rotating to {courier} after {attempt} attempts')
            surb_id = self.entropy.randbytes(16)
            event = self.env.event()
            self._surbs[surb_id] = event
            self.network.via_mixnet(courier, make_message(surb_id), REQUEST_HOPS)
            result = yield event | self.env.timeout(self.network.client_timeout)
            if event in result:
                return result[event]
            self._surbs.pop(surb_id, None)
        return None

    def send_envelope(self, envelope: CourierEnvelope):
        payload = envelope.to_bytes()
        return (yield from self._request(lambda surb: ClientRequest(self.name, payload, surb)))

    def write_box(self, box: BacapBox):
        """Write one box through a courier; returns True once the write is acknowledged."""
        envelope = self.network.write_envelope(box, self.network.pick_intermediates(self.draws), self.entropy)
        acked = (yield from self.send_envelope(envelope)) == ACK
        if acked:
            self.acks_received += 1
        return acked

    def write(self, channel: ChannelState, body: bytes):
        return (yield from self.write_box(channel.send(body).box))

    def read_box(self, box_id: bytes):
        """Poll for a box; returns it, or None when retries run out."""
        envelope, dek = self.network.read_envelope(box_id, self.network.shard_map.select(box_id), self.entropy)
        for _ in range(self.network.read_polls):
            payload = yield from self.send_envelope(envelope)
            if payload is not None:
                status, box = open_reply(dek, payload)
                if status is ReplyStatus.FOUND:
                    return box
            yield self.env.timeout(self.network.retry_interval)
        return None

    def read(self, reader: ChannelReader):
        box = yield from self.read_box(reader.box_id)
        return reader.accept(box) if box is not None else None

    def prepare_copy(self, destination: ChannelState, bodies: list[bytes]) -> tuple[ChannelState, list[BacapBox]]:
        """Seal ``bodies`` for ``destination`` and wrap each write envelope in a fresh temporary channel.

        Every item shares one pair of intermediate replicas. The returned temporary boxes still have to be
        written before the copy command is sent.
        """
        intermediates = self.network.pick_intermediates(self.draws)
        temp = ChannelState(
            generate_write_cap(self.entropy), self.network.wsrv_context(), self.network.copy_payload_size
        )
        boxes = []
        for body in bodies:
            envelope = self.network.write_envelope(destination.send(body).box, intermediates, self.entropy)
            boxes.append(temp.send(envelope.to_bytes()).box)
        return temp, boxes

    def copy(self, temp: ChannelState, start_index: int, count: int):
        """Ask a courier to execute the temporary channel; True only on the all-or-nothing ACK."""
        cap = temp.write_cap
        if start_index != cap.index:
            raise PigeonholeError('copy commands start at the temporary capability index')
        payload = yield from self._request(
            lambda surb: CopyRequest(self.name, cap.to_bytes(), temp.ctx.value, count, surb)
        )
        return payload == ACK


# World


class PigeonholeNetwork:
    def __init__(
        self,
        replicas: int = 6,
        couriers: int = 3,
        seed: int = 1,
        faults: FaultSchedule | None = None,
        settings: Settings | None = None,
        mu: float = 0.2,
        link_rate: float = 50.0,
        retention_weeks: int = 2,
        store_dir=None,
    ):
        self.settings = settings or get_settings()
        self.env = simpy.Environment()
        self.streams = RandomStreams(seed)
        self.faults = faults or FaultSchedule()
        self.fault_draws = Draws(self.streams.generator('faults'))
        self.pki = PkiView(self.settings.epoch_seconds)
        self.nike = X25519Nike()
        self.mixnet_request = ErlangLatency(REQUEST_HOPS, 1.0 / mu)
        self.mixnet_reply = ErlangLatency(REPLY_HOPS, 1.0 / mu)
        self._mixnet_rng = self.streams.generator('mixnet')
        self.link_rate = link_rate
        self.retention_weeks = retention_weeks

        self.retry_interval = 10.0
        self.replica_timeout = 5.0
        self.client_timeout = 20.0
        self.client_attempts = 3 * self.settings.courier_rotation_retries
        self.read_polls = 12
        self.copy_read_attempts = 6
        self.stage_attempts = 3
        self.max_box_payload = self.settings.box_payload_size
        self.copy_payload_size = write_envelope_size(self.settings.box_payload_size) + MESSAGE_HEADER_SIZE
        self.fired_delays: list[float] = []

        self._links: dict[tuple[str, str], ConstantRateLink] = {}
        self._secrets: dict[bytes, ReplicaSecrets] = {}
        self._names: dict[bytes, str] = {}
        descriptors = []
        for i in range(replicas):
            name = f'replica-{i}'
            entropy = self.streams.entropy(f'{name}/keys')
            identity_private, identity_public = self.nike.generate_keypair(entropy)
            descriptor = ReplicaDescriptor(name, identity_public)
            self.pki.register_replica(descriptor)
            self._secrets[descriptor.replica_id] = ReplicaSecrets(identity_private)
            self._names[descriptor.replica_id] = name
            descriptors.append(descriptor)
        self.shard_map = ShardMap(
            [ReplicaEntry(d.replica_id, d.identity_public) for d in descriptors], self.settings.replication_factor
        )
        self.replicas: dict[str, ReplicaActor] = {}
        for descriptor in descriptors:
            store = ReplicaStore(
                None if store_dir is None else store_dir / descriptor.name, retention_weeks
            )
            store.open_week(0)
            replica = Replica(
                descriptor,
                self._secrets[descriptor.replica_id],
                store,
                self.shard_map,
                self.streams.entropy(f'{descriptor.name}/crypto'),
                self.copy_payload_size,
                (self.settings.pending_read_delay_min, self.settings.pending_read_delay_max),
                self.nike,
            )
            self.replicas[descriptor.name] = ReplicaActor(self, replica)
        self.courier_names = [f'courier-{i}' for i in range(couriers)]
        self.couriers = {name: CourierActor(self, name) for name in self.courier_names}
        self.clients: dict[str, PigeonholeClient] = {}
        self.env.process(self._weeks())

    # Keys and contexts

    def epoch(self) -> int:
        return self.pki.epoch_at(self.env.now)

    def epoch_key(self, replica_id: bytes, epoch: int) -> bytes:
        descriptor = self.pki.replica(replica_id)
        if epoch not in descriptor.epoch_public:
            entropy = self.streams.entropy(f'{descriptor.name}/epoch-{epoch}')
            private, public = self.nike.generate_keypair(entropy)
            descriptor.epoch_public[epoch] = public
            self._secrets[replica_id].epoch_private[epoch] = private
        return descriptor.epoch_public[epoch]

    def wsrv_context(self, week: int | None = None) -> Context:
        week = self.pki.week_at(self.env.now) if week is None else week
        try:
            value = self.pki.wsrv(week)
        except KeyError:
            value = hash256(b'wsrv', self.streams.seed.to_bytes(8, 'big', signed=True), week.to_bytes(8, 'big'))
            self.pki.publish_wsrv(week, value)
        return Context.from_public_value(value)

    def _weeks(self):
        self.wsrv_context(0)
        week = 0
        while True:
            yield self.env.timeout((week + 1) * SECONDS_PER_WEEK - self.env.now)
            week += 1
            self.wsrv_context(week)
            for actor in self.replicas.values():
                actor.replica.open_week(week)
            logger.info(f'Entered week {week}')

    def replica_name(self, replica_id: bytes) -> str:
        return self._names[replica_id]

    def pick_intermediates(self, draws: Draws) -> list[bytes]:
        ids = [r.replica_id for r in self.shard_map.replicas]
        first = draws.index(len(ids))
        second = draws.index(len(ids) - 1)
        if second >= first:
            second += 1
        return [ids[first], ids[second]]

    def write_envelope(self, box: BacapBox, intermediates: list[bytes], entropy) -> CourierEnvelope:
        epoch = self.epoch()
        keys = [(rid, self.epoch_key(rid, epoch)) for rid in intermediates]
        envelope, _ = seal_envelope(EnvelopeKind.WRITE, box.to_bytes(), keys, epoch, entropy, self.nike)
        return envelope

    def read_envelope(self, box_id: bytes, shard: list[bytes], entropy) -> tuple[CourierEnvelope, bytes]:
        epoch = self.epoch()
        keys = [(rid, self.epoch_key(rid, epoch)) for rid in shard]
        return seal_envelope(EnvelopeKind.READ, box_id, keys, epoch, entropy, self.nike)

    # Transport

    def client(self, name: str) -> PigeonholeClient:
        if name not in self.clients:
            self.clients[name] = PigeonholeClient(self, name)
        return self.clients[name]

    def link(self, src: str, dst: str) -> ConstantRateLink:
        key = (src, dst)
        if key not in self._links:
            self._links[key] = ConstantRateLink(self, src, dst, self.link_rate)
        return self._links[key]

    def deliver(self, dst: str, message):
        actor = self.replicas.get(dst) or self.couriers.get(dst) or self.clients.get(dst)
        if actor is None:
            raise PigeonholeError(f'no actor named {dst}')
        actor.inbox.put(message)

    def via_mixnet(self, dst: str, message, hops: int):
        latency = (self.mixnet_request if hops == REQUEST_HOPS else self.mixnet_reply).sample(self._mixnet_rng)
        self.env.process(self._mixnet_carry(float(latency), dst, message))

    def _mixnet_carry(self, latency: float, dst: str, message):
        yield self.env.timeout(latency)
        self.deliver(dst, message)

    def dummy_counts(self) -> dict[tuple[str, str], int]:
        return {key: link.dummies(self.env.now) for key, link in self._links.items()}

    def run(self, process_or_until):
        return self.env.run(until=process_or_until)

    def spawn(self, generator) -> simpy.Process:
        return self.env.process(generator)

    def stored(self, box_id: bytes) -> list[BacapBox | None]:
        """What each final replica of ``box_id`` holds."""
        return [self.replicas[self.replica_name(rid)].replica.store.get(box_id) for rid in self.shard_map.select(box_id)]
