"""NIKE Sphinx: one ephemeral key, re-blinded at every hop."""

from mixnet_workbench.crypto_core import CryptoError, EntropySource, NikeSuite, get_nike
from mixnet_workbench.sphinx.commands import decode_commands, encode_commands
from mixnet_workbench.sphinx.errors import GeometryError, MacError
from mixnet_workbench.sphinx.sizes import SphinxGeometry
from mixnet_workbench.sphinx.packet import (
    ForwardEvent,
    HopKeys,
    PathSpec,
    SphinxPacket,
    TerminalEvent,
    derive_hop_keys,
    encrypt_routing,
    forward_commands,
    frame_payload,
    layer_payload,
    peel_routing,
    process_slot,
    record_replay,
)
from mixnet_workbench.sphinx.replay import ReplayCache


def _suite(geometry: SphinxGeometry, suite: NikeSuite | None) -> NikeSuite:
    if geometry.kind != 'nike':
        raise GeometryError(f'{geometry.suite_name} geometry is not a NIKE geometry')
    return suite if suite is not None else get_nike(geometry.suite_name)


def nike_header(
    geometry: SphinxGeometry,
    path: PathSpec,
    suite: NikeSuite | None = None,
    rng: EntropySource | None = None,
) -> tuple[bytes, bytes, bytes, list[HopKeys]]:
    nike = _suite(geometry, suite)
    path.check(geometry)
    ephemeral, alpha = nike.generate_keypair(rng)

    keys: list[HopKeys] = []
    factors = [ephemeral]
    for hop in path.hops:
        shared = hop.public_key
        for factor in factors:
            shared = nike.blind(shared, factor)
        hop_keys = derive_hop_keys(shared, nike.private_key_size)
        keys.append(hop_keys)
        factors.append(hop_keys.blinding)

    hops = path.hops

    def slot_for(i: int, next_gamma: bytes | None) -> bytes:
        if next_gamma is None:
            return encode_commands(path.terminal_commands(), geometry.slot_size)
        return encode_commands(forward_commands(hops[i], hops[i + 1], next_gamma), geometry.slot_size)

    beta, gamma = encrypt_routing(geometry, keys, slot_for)
    return alpha, beta, gamma, keys


def nike_wrap(
    geometry: SphinxGeometry,
    path: PathSpec,
    payload: bytes,
    *,
    surb: bytes | None = None,
    suite: NikeSuite | None = None,
    rng: EntropySource | None = None,
) -> SphinxPacket:
    plaintext = frame_payload(geometry, payload, surb)
    alpha, beta, gamma, keys = nike_header(geometry, path, suite, rng)
    return SphinxPacket(alpha, beta, gamma, layer_payload(keys, plaintext))


def nike_unwrap(
    geometry: SphinxGeometry,
    private_key: bytes,
    packet: SphinxPacket,
    *,
    suite: NikeSuite | None = None,
    replay_cache: ReplayCache | None = None,
    epoch: int = 0,
) -> ForwardEvent | TerminalEvent:
    nike = _suite(geometry, suite)
    packet.check(geometry)
    try:
        shared = nike.exchange(private_key, packet.alpha)
    except CryptoError as e:
        raise MacError('malformed group element in header') from e
    keys = derive_hop_keys(shared, nike.private_key_size)
    slot, next_beta = peel_routing(geometry, keys, packet.beta, packet.gamma)
    record_replay(replay_cache, keys, epoch)
    return process_slot(
        geometry,
        keys,
        decode_commands(slot),
        lambda: nike.blind(packet.alpha, keys.blinding),
        next_beta,
        packet.delta,
    )
