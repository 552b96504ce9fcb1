import pytest

from mixnet_workbench.crypto_core import InstrumentedKem, InstrumentedNike, get_suite, hash256
from mixnet_workbench.sphinx import (
    ForwardEvent,
    GeometryError,
    MacError,
    PathHop,
    PathSpec,
    PayloadIntegrityError,
    ReplayCache,
    ReplayError,
    SphinxPacket,
    SurbKeyring,
    SurbReuseError,
    TerminalEvent,
    UnknownSurbError,
    decode_commands,
    encode_commands,
    geometry,
    recipient_id,
    surb_decrypt,
    surb_reply,
    unwrap,
    wrap,
)
from mixnet_workbench.sphinx import NextHop, NodeDelay, Recipient, SurbReply

EXPECTED = {
    'x25519': (476, 1082),
    'x448': (500, 1130),
    'x25519-kem': (636, 1402),
    'x448-kem': (780, 1690),
    'mlkem768-x25519': (7164, 14458),
    'mlkem768-x448': (7308, 14746),
}


def _nodes(suite, count, entropy):
    keypairs = [suite.generate_keypair(entropy) for _ in range(count)]
    hops = [PathHop(hash256(b'node', bytes([i])), public, delay_ms=10 * i) for i, (_, public) in enumerate(keypairs)]
    return [private for private, _ in keypairs], hops


def _walk(geom, privates, packet, **kwargs):
    events = []
    for private in privates:
        event = unwrap(geom, private, packet, **kwargs)
        events.append(event)
        if isinstance(event, ForwardEvent):
            packet = event.packet
    return events


@pytest.mark.parametrize('name', list(EXPECTED))
def test_geometry_table(name):
    g = geometry(name, 5, 30000)
    assert (g.header_size, g.overhead_size) == EXPECTED[name]
    assert g.packet_size == g.header_size + g.delta_size


def test_geometry_grows_with_hops_and_kem_costs_more():
    for hops in range(1, 9):
        assert geometry('x25519', hops + 1, 100).header_size > geometry('x25519', hops, 100).header_size
        assert geometry('x25519-kem', hops, 100).header_size > geometry('x25519', hops, 100).header_size


def test_geometry_rejects_bad_parameters():
    with pytest.raises(GeometryError):
        geometry('x25519', 0, 100)
    with pytest.raises(GeometryError):
        geometry('x25519', 5, -1)


@pytest.mark.parametrize('name', ['x25519', 'x448', 'x25519-kem', 'x448-kem'])
@pytest.mark.parametrize('hop_count', [1, 3, 5])
def test_forward_path_delivers_payload(name, hop_count, entropy):
    suite = get_suite(name)
    geom = geometry(suite, 5, 200)
    privates, hops = _nodes(suite, hop_count, entropy)
    packet = wrap(geom, PathSpec(hops, recipient_id('bob')), b'hello', suite=suite, rng=entropy)
    assert len(packet.to_bytes()) == geom.packet_size

    events = _walk(geom, privates, packet, suite=suite)
    for i, event in enumerate(events[:-1]):
        assert isinstance(event, ForwardEvent)
        assert event.next_hop == hops[i + 1].node_id
        assert event.delay_ms == hops[i].delay_ms
        assert len(event.packet.to_bytes()) == geom.packet_size
    terminal = events[-1]
    assert isinstance(terminal, TerminalEvent)
    assert terminal.recipient_id == recipient_id('bob')
    assert terminal.payload.rstrip(b'\x00') == b'hello'


def test_public_key_operations_per_hop(entropy):
    for name, expected in (('x25519', 2), ('x25519-kem', 1)):
        suite = get_suite(name)
        geom = geometry(suite, 5, 64)
        privates, hops = _nodes(suite, 5, entropy)
        packet = wrap(geom, PathSpec(hops, recipient_id('bob')), b'x', suite=suite, rng=entropy)
        counter = InstrumentedNike(suite) if name == 'x25519' else InstrumentedKem(suite)
        for private in privates[:-1]:
            counter.reset()
            packet = unwrap(geom, private, packet, suite=counter).packet
            assert counter.public_key_operations == expected


def test_header_tampering_fails_mac(entropy):
    suite = get_suite('x25519')
    geom = geometry(suite, 5, 64)
    privates, hops = _nodes(suite, 3, entropy)
    packet = wrap(geom, PathSpec(hops, recipient_id('bob')), b'x', suite=suite, rng=entropy)
    beta = bytearray(packet.beta)
    beta[10] ^= 0x80
    with pytest.raises(MacError):
        unwrap(geom, privates[0], SphinxPacket(packet.alpha, bytes(beta), packet.gamma, packet.delta), suite=suite)


def test_wrong_node_key_fails_mac(entropy):
    suite = get_suite('x25519')
    geom = geometry(suite, 5, 64)
    privates, hops = _nodes(suite, 3, entropy)
    packet = wrap(geom, PathSpec(hops, recipient_id('bob')), b'x', suite=suite, rng=entropy)
    with pytest.raises(MacError):
        unwrap(geom, privates[1], packet, suite=suite)


def test_payload_tagging_detected_at_terminal_hop(entropy):
    suite = get_suite('x25519')
    geom = geometry(suite, 5, 64)
    privates, hops = _nodes(suite, 3, entropy)
    packet = wrap(geom, PathSpec(hops, recipient_id('bob')), b'x', suite=suite, rng=entropy)
    delta = bytearray(packet.delta)
    delta[-1] ^= 1
    tagged = SphinxPacket(packet.alpha, packet.beta, packet.gamma, bytes(delta))
    with pytest.raises(PayloadIntegrityError):
        _walk(geom, privates, tagged, suite=suite)


def test_replay_rejected_within_epoch(entropy):
    suite = get_suite('x25519')
    geom = geometry(suite, 5, 64)
    privates, hops = _nodes(suite, 2, entropy)
    packet = wrap(geom, PathSpec(hops, recipient_id('bob')), b'x', suite=suite, rng=entropy)
    cache = ReplayCache()
    unwrap(geom, privates[0], packet, suite=suite, replay_cache=cache, epoch=3)
    with pytest.raises(ReplayError):
        unwrap(geom, privates[0], packet, suite=suite, replay_cache=cache, epoch=3)
    cache.prune(5)
    assert len(cache) == 0


def test_oversized_payload_rejected(entropy):
    suite = get_suite('x25519')
    geom = geometry(suite, 5, 16)
    _, hops = _nodes(suite, 2, entropy)
    with pytest.raises(GeometryError):
        wrap(geom, PathSpec(hops, recipient_id('bob')), b'x' * 17, suite=suite, rng=entropy)


def test_path_longer_than_geometry_rejected(entropy):
    suite = get_suite('x25519')
    geom = geometry(suite, 2, 16)
    _, hops = _nodes(suite, 3, entropy)
    with pytest.raises(GeometryError):
        wrap(geom, PathSpec(hops, recipient_id('bob')), b'x', suite=suite, rng=entropy)


@pytest.mark.parametrize('name', ['x25519', 'x25519-kem'])
def test_surb_reply_round_trip(name, entropy):
    suite = get_suite(name)
    geom = geometry(suite, 5, 128)
    privates, hops = _nodes(suite, 4, entropy)
    keyring = SurbKeyring(geom)
    surb = keyring.create(PathSpec(hops, recipient_id('alice')), suite=suite, rng=entropy)

    first_hop, packet = surb_reply(geom, surb, b'pong')
    assert first_hop == hops[0].node_id
    terminal = _walk(geom, privates, packet, suite=suite)[-1]
    assert terminal.is_reply and terminal.payload is None

    assert surb_decrypt(keyring, terminal.surb_id, terminal.delta).rstrip(b'\x00') == b'pong'
    with pytest.raises(SurbReuseError):
        surb_decrypt(keyring, terminal.surb_id, terminal.delta)
    with pytest.raises(UnknownSurbError):
        surb_decrypt(keyring, b'\x00' * 16, terminal.delta)


def test_forward_payload_can_carry_a_surb(entropy):
    suite = get_suite('x25519')
    geom = geometry(suite, 5, 64)
    privates, hops = _nodes(suite, 3, entropy)
    surb = SurbKeyring(geom).create(PathSpec(hops, recipient_id('alice')), suite=suite, rng=entropy)
    packet = wrap(geom, PathSpec(hops, recipient_id('bob')), b'ping', surb=surb.to_bytes(), suite=suite, rng=entropy)
    terminal = _walk(geom, privates, packet, suite=suite)[-1]
    assert terminal.surb == surb.to_bytes()


def test_routing_commands_encode_and_decode():
    commands = [NextHop(b'\x01' * 32, b'\x02' * 32), NodeDelay(250), Recipient(recipient_id('x')), SurbReply(b'\x03' * 16)]
    assert decode_commands(encode_commands(commands, 300)) == commands
