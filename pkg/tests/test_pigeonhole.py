import pytest

from mixnet_workbench.bacap import Context, generate_write_cap, keys_at, make_tombstone, seal
from mixnet_workbench.crypto_core import X25519Nike, hash256
from mixnet_workbench.pigeonhole import (
    BoxRejectedError,
    ChannelError,
    ChannelMessage,
    ChannelReader,
    ChannelState,
    CourierState,
    Decision,
    EnvelopeError,
    EnvelopeKind,
    PigeonholeNetwork,
    Replica,
    ReplicaEntry,
    ReplicaStore,
    ReplyStatus,
    ShardingError,
    ShardMap,
    StoreError,
    StoreOutcome,
    TombstonePrecedenceError,
    all_or_nothing_sweep,
    backfill_after_retention,
    minimum_storage_time,
    open_envelope,
    open_reply,
    reply_size,
    retention_weeks_for,
    seal_envelope,
    seal_reply,
)
from mixnet_workbench.pigeonhole.channel import MESSAGE_HEADER_SIZE
from mixnet_workbench.pigeonhole.network import FaultSchedule, ReplicaOutage
from mixnet_workbench.pki import SECONDS_PER_WEEK, PkiView, provision_replica

CTX = Context.from_public_value(b'wsrv')
NIKE = X25519Nike()


def _entries(n: int) -> list[ReplicaEntry]:
    return [ReplicaEntry(hash256(b'id', bytes([i])), hash256(b'pk', bytes([i]))) for i in range(n)]


@pytest.fixture
def write_cap(entropy):
    return generate_write_cap(entropy)


class TestSharding:
    def test_selects_k_distinct_replicas(self):
        shard = ShardMap(_entries(10), k=2)
        for i in range(50):
            chosen = shard.select(bytes([i]) * 32)
            assert len(chosen) == 2 and len(set(chosen)) == 2

    def test_removal_moves_only_affected_boxes(self):
        entries = _entries(10)
        shard = ShardMap(entries, k=2)
        removed = entries[3].replica_id
        smaller = shard.without(removed)
        for i in range(200):
            box_id = hash256(b'box', i.to_bytes(2, 'big'))
            before, after = shard.select(box_id), smaller.select(box_id)
            if removed not in before:
                assert before == after
            else:
                assert [r for r in before if r != removed][0] in after

    def test_errors(self):
        with pytest.raises(ShardingError):
            ShardMap(_entries(1), k=2).select(b'x' * 32)
        entry = _entries(1)[0]
        with pytest.raises(ShardingError):
            ShardMap([entry, entry])


class TestEnvelopes:
    def _replicas(self, entropy, n=2):
        return [NIKE.generate_keypair(entropy) + (hash256(b'r', bytes([i])),) for i in range(n)]

    def test_each_replica_opens_the_envelope(self, entropy):
        replicas = self._replicas(entropy)
        envelope, dek = seal_envelope(
            EnvelopeKind.WRITE, b'box bytes', [(rid, pub) for _, pub, rid in replicas], epoch=4, rng=entropy
        )
        for private, _, rid in replicas:
            assert open_envelope(envelope, rid, private) == (b'box bytes', dek)

    def test_wrong_replica_or_key_fails(self, entropy):
        (private, public, rid), (other_private, _, other_rid) = self._replicas(entropy)
        envelope, _ = seal_envelope(EnvelopeKind.READ, b'x' * 32, [(rid, public)], epoch=0, rng=entropy)
        with pytest.raises(EnvelopeError):
            open_envelope(envelope, other_rid, other_private)
        with pytest.raises(EnvelopeError):
            open_envelope(envelope, rid, other_private)

    def test_encoding_round_trip(self, entropy):
        (_, public, rid), (_, public2, rid2) = self._replicas(entropy)
        envelope, _ = seal_envelope(EnvelopeKind.WRITE, b'payload', [(rid, public), (rid2, public2)], 9, entropy)
        decoded = type(envelope).from_bytes(envelope.to_bytes())
        assert decoded == envelope and decoded.digest == envelope.digest
        with pytest.raises(EnvelopeError):
            type(envelope).from_bytes(envelope.to_bytes()[:100])

    def test_replies_have_uniform_size(self, write_cap, entropy):
        box = seal(keys_at(write_cap, CTX, write_cap.index), write_cap, b'm' * 200)
        dek = b'd' * 32
        found = seal_reply(dek, ReplyStatus.FOUND, box, 512, entropy)
        missing = seal_reply(dek, ReplyStatus.NOT_FOUND, None, 512, entropy)
        assert len(found) == len(missing) == reply_size(512)
        assert open_reply(dek, found) == (ReplyStatus.FOUND, box)
        assert open_reply(dek, missing) == (ReplyStatus.NOT_FOUND, None)
        with pytest.raises(EnvelopeError):
            open_reply(b'e' * 32, found)


class TestChannel:
    def test_message_framing(self):
        encoded = ChannelMessage(b'hi', ack_index=7).encode(64)
        assert len(encoded) == 64
        assert ChannelMessage.decode(encoded) == ChannelMessage(b'hi', 7)
        assert ChannelMessage.decode(ChannelMessage(b'hi').encode(64)).ack_index is None
        with pytest.raises(ChannelError):
            ChannelMessage(b'x' * (64 - MESSAGE_HEADER_SIZE + 1)).encode(64)

    def test_reader_follows_writer(self, write_cap):
        channel = ChannelState(write_cap, CTX, 128)
        reader = ChannelReader(write_cap.read_cap(), CTX)
        for body in (b'one', b'two', b'three'):
            sent = channel.send(body)
            assert reader.box_id == sent.box.box_id
            assert reader.accept(sent.box).body == body

    def test_boxes_of_a_channel_have_one_size(self, write_cap):
        channel = ChannelState(write_cap, CTX, 128)
        assert len({len(channel.send(b'x' * n).box.to_bytes()) for n in (0, 10, 100)}) == 1

    def test_acknowledgements_are_monotonic(self, write_cap):
        channel = ChannelState(write_cap, CTX, 64)
        first = [channel.send(b'm').keys.index for _ in range(4)]
        channel.acknowledge(first[2])
        assert list(channel.unacked) == [first[3]]
        channel.acknowledge(first[0])
        assert channel.last_acked == first[2]

    def test_ack_rides_on_the_next_send(self, write_cap):
        channel = ChannelState(write_cap, CTX, 64)
        reader = ChannelReader(write_cap.read_cap(), CTX)
        channel.note_received(41)
        channel.note_received(40)
        assert reader.accept(channel.send(b'a').box).ack_index == 41
        assert reader.accept(channel.send(b'b').box).ack_index is None

    def test_rotation_restarts_indices(self, write_cap):
        channel = ChannelState(write_cap, CTX, 64)
        channel.send(b'old')
        new_ctx = Context.from_public_value(b'next week')
        channel.rotate(new_ctx, from_index=write_cap.index)
        assert channel.next_index == write_cap.index
        reader = ChannelReader(write_cap.read_cap(), new_ctx)
        assert reader.accept(channel.send(b'new').box).body == b'new'


class TestCourierState:
    def _envelope(self, entropy):
        _, public = NIKE.generate_keypair(entropy)
        envelope, _ = seal_envelope(EnvelopeKind.READ, b'i' * 32, [(b'r' * 32, public)], 0, entropy)
        return envelope

    def test_dedup_and_cache(self, entropy):
        courier = CourierState('courier-0', cache_ttl=100.0)
        envelope = self._envelope(entropy)
        assert courier.accept(envelope, b's1', now=0.0) == (Decision.FORWARD, None)
        assert courier.accept(envelope, b's2', now=1.0) == (Decision.WAIT, None)
        assert courier.record_response(envelope.digest, b'reply', now=2.0) == [b's1', b's2']
        assert courier.accept(envelope, b's3', now=3.0) == (Decision.REPLY, b'reply')

    def test_entries_expire(self, entropy):
        courier = CourierState('courier-0', cache_ttl=10.0)
        envelope = self._envelope(entropy)
        courier.accept(envelope, b's1', now=0.0)
        courier.record_response(envelope.digest, b'reply', now=1.0)
        assert courier.accept(envelope, b's2', now=50.0) == (Decision.FORWARD, None)

    def test_courier_never_sees_box_ids(self, entropy):
        courier = CourierState('courier-0')
        envelope = self._envelope(entropy)
        courier.accept(envelope, b's1', now=0.0)
        state = repr(courier.observable_state())
        assert repr(b'i' * 32) not in state


class TestStore:
    def test_retention_drops_old_weeks(self, write_cap):
        store = ReplicaStore(retention_weeks=2)
        store.open_week(0)
        box = seal(keys_at(write_cap, CTX, write_cap.index), write_cap, b'm')
        store.put(box)
        store.open_week(1)
        assert store.get(box.box_id) == box
        assert store.open_week(2) == [0]
        assert store.get(box.box_id) is None

    def test_log_replay_rebuilds_state(self, tmp_path, write_cap):
        store = ReplicaStore(tmp_path, retention_weeks=3)
        store.open_week(0)
        keys = keys_at(write_cap, CTX, write_cap.index)
        store.put(seal(keys, write_cap, b'm'))
        store.open_week(1)
        tombstone = make_tombstone(keys, write_cap)
        store.put(tombstone)
        store.stage(b's' * 32, b'kept')
        store.stage(b't' * 32, b'gone')
        store.unstage(b't' * 32)

        loaded = ReplicaStore.load(tmp_path, retention_weeks=3)
        assert loaded.get(tombstone.box_id) == tombstone
        assert loaded.box_count() == 1
        assert {k: v[1] for k, v in loaded.staged.items()} == {b's' * 32: b'kept'}

    def test_corrupt_log(self, tmp_path):
        (tmp_path / 'bucket-0.log').write_bytes(b'NOTALOG')
        with pytest.raises(StoreError):
            ReplicaStore.load(tmp_path)

    def test_staging_id_size(self):
        with pytest.raises(StoreError):
            ReplicaStore().stage(b'short', b'x')


class TestReplica:
    @pytest.fixture
    def replica(self, entropy):
        pki = PkiView()
        descriptor, secrets = provision_replica(pki, 'replica-0', NIKE, entropy, range(2))
        _, other_public = NIKE.generate_keypair(entropy)
        shard = ShardMap(
            [ReplicaEntry(descriptor.replica_id, descriptor.identity_public), ReplicaEntry(b'o' * 32, other_public)], k=2
        )
        store = ReplicaStore()
        store.open_week(0)
        return Replica(descriptor, secrets, store, shard, entropy, max_box_payload=256)

    def _write(self, replica, box, entropy):
        key = replica.descriptor.epoch_public[1]
        envelope, _ = seal_envelope(EnvelopeKind.WRITE, box.to_bytes(), [(replica.replica_id, key)], 1, entropy)
        return envelope

    def test_write_takes_responsibility(self, replica, write_cap, entropy):
        box = seal(keys_at(write_cap, CTX, write_cap.index), write_cap, b'm')
        duty = replica.accept_write(self._write(replica, box, entropy))
        assert duty.box == box and len(duty.finals) == 2
        assert [d.outbox_id for d in replica.outbox()] == [duty.outbox_id]
        replica.delivered(duty.outbox_id)
        assert replica.outbox() == []

    def test_unknown_epoch(self, replica, write_cap, entropy):
        _, public = NIKE.generate_keypair(entropy)
        envelope, _ = seal_envelope(EnvelopeKind.WRITE, b'x', [(replica.replica_id, public)], 7, entropy)
        with pytest.raises(EnvelopeError):
            replica.accept_write(envelope)

    def test_tombstone_precedence(self, replica, write_cap):
        keys = keys_at(write_cap, CTX, write_cap.index)
        box, tombstone = seal(keys, write_cap, b'm'), make_tombstone(keys, write_cap)
        assert replica.store_final(box)[0] is StoreOutcome.STORED
        assert replica.store_final(box)[0] is StoreOutcome.DUPLICATE
        assert replica.store_final(tombstone)[0] is StoreOutcome.REPLACED
        with pytest.raises(TombstonePrecedenceError):
            replica.store_final(box)

    def test_overwrite_rejected(self, replica, write_cap):
        keys = keys_at(write_cap, CTX, write_cap.index)
        replica.store_final(seal(keys, write_cap, b'one'))
        with pytest.raises(BoxRejectedError):
            replica.store_final(seal(keys, write_cap, b'two'))

    def test_read_miss_registers_pending_read(self, replica, write_cap, entropy):
        box = seal(keys_at(write_cap, CTX, write_cap.index), write_cap, b'm')
        key = replica.descriptor.epoch_public[1]
        envelope, dek = seal_envelope(EnvelopeKind.READ, box.box_id, [(replica.replica_id, key)], 1, entropy)
        miss = replica.serve_read(envelope, 'courier-0', 1)
        assert not miss.found and open_reply(dek, miss.reply)[0] is ReplyStatus.NOT_FOUND
        _, fired = replica.store_final(box)
        assert len(fired) == 1 and 1.0 <= fired[0].delay <= 30.0
        hit = replica.fire(fired[0])
        assert hit.found and len(hit.reply) == len(miss.reply)
        assert open_reply(dek, hit.reply) == (ReplyStatus.FOUND, box)

    def test_copy_staging(self, replica, write_cap, entropy):
        boxes = [seal(keys_at(write_cap, CTX, write_cap.index + i), write_cap, b'm') for i in range(3)]
        for box in boxes:
            replica.stage_copy(b'c' * 16, self._write(replica, box, entropy))
        assert replica.outbox() == []
        assert replica.discard_copy(b'x' * 16) == 0
        duties = replica.commit_copy(b'c' * 16)
        assert sorted(d.box.box_id for d in duties) == sorted(b.box_id for b in boxes)
        assert replica.commit_copy(b'c' * 16) == []


def test_retention_arithmetic():
    throughput = 1000.0
    capacity = int(3.5 * throughput * SECONDS_PER_WEEK)
    assert retention_weeks_for(capacity, throughput) == 3
    assert minimum_storage_time(capacity, throughput) == 2 * SECONDS_PER_WEEK


class TestNetwork:
    def test_write_then_read(self, write_cap):
        network = PigeonholeNetwork(seed=4)
        writer, reader_client = network.client('writer'), network.client('reader')
        channel = ChannelState(write_cap, network.wsrv_context(), network.settings.box_payload_size)
        reader = ChannelReader(write_cap.read_cap(), network.wsrv_context())
        results = {}

        def script():
            results['acked'] = yield from writer.write(channel, b'hello')
            message = yield from reader_client.read(reader)
            results['body'] = message.body if message else None

        network.run(network.spawn(script()))
        assert results == {'acked': True, 'body': b'hello'}
        assert all(box is not None for box in network.stored(channel.unacked[write_cap.index].box.box_id))
        assert sum(network.dummy_counts().values()) > 0

    def test_resend_is_answered_from_the_cache(self, write_cap):
        network = PigeonholeNetwork(seed=6, couriers=1)
        writer = network.client('writer')
        channel = ChannelState(write_cap, network.wsrv_context(), network.settings.box_payload_size)
        box = channel.send(b'once').box
        envelope = network.write_envelope(box, network.pick_intermediates(writer.draws), writer.entropy)
        replies = []

        def script():
            replies.append((yield from writer.send_envelope(envelope)))
            replies.append((yield from writer.send_envelope(envelope)))

        network.run(network.spawn(script()))
        assert replies == [b'ACK', b'ACK']
        assert sum(r.replica.requests_seen for r in network.replicas.values()) <= 2

    def test_courier_box_write_gives_up_when_every_replica_is_down(self, write_cap):
        down = FaultSchedule(outages=[ReplicaOutage(f'replica-{i}', 0.0, 10_000.0) for i in range(6)])
        network = PigeonholeNetwork(seed=8, couriers=1, faults=down)
        courier = network.couriers['courier-0']
        channel = ChannelState(write_cap, network.wsrv_context(), network.settings.box_payload_size)
        box = channel.tombstone(write_cap.index)

        written = network.run(network.spawn(courier._write_box(box)))
        assert written is False
        assert network.env.now < 10_000.0

    @pytest.mark.slow
    def test_backfill_after_retention(self):
        report = backfill_after_retention(seed=1)
        assert report.passed, report

    @pytest.mark.slow
    def test_stale_reader_finds_nothing(self):
        report = backfill_after_retention(seed=1, stale_reader=True)
        assert report.copy_acked and report.recovered == []

    @pytest.mark.slow
    def test_copy_is_all_or_nothing_under_faults(self):
        trials = all_or_nothing_sweep(trials=20, seed=2)
        assert all(trial.all_or_nothing for trial in trials)
