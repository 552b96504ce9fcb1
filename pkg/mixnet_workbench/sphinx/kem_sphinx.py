"""KEM Sphinx: a fresh encapsulation per hop, each next-hop ciphertext carried inside β."""

from mixnet_workbench.crypto_core import CryptoError, EntropySource, KemSuite, get_kem
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


def _suite(geometry: SphinxGeometry, suite: KemSuite | None) -> KemSuite:
    if geometry.kind != 'kem':
        raise GeometryError(f'{geometry.suite_name} geometry is not a KEM geometry')
    return suite if suite is not None else get_kem(geometry.suite_name)


def kem_header(
    geometry: SphinxGeometry,
    path: PathSpec,
    suite: KemSuite | None = None,
    rng: EntropySource | None = None,
) -> tuple[bytes, bytes, bytes, list[HopKeys]]:
    kem = _suite(geometry, suite)
    path.check(geometry)
    encapsulations = [kem.encapsulate(hop.public_key, rng) for hop in path.hops]
    keys = [derive_hop_keys(e.shared_secret) for e in encapsulations]
    hops = path.hops
    commands_size = geometry.commands_size

    def slot_for(i: int, next_gamma: bytes | None) -> bytes:
        if next_gamma is None:
            return bytes(geometry.kem_ciphertext_size) + encode_commands(path.terminal_commands(), commands_size)
        commands = encode_commands(forward_commands(hops[i], hops[i + 1], next_gamma), commands_size)
        return encapsulations[i + 1].ciphertext + commands

    beta, gamma = encrypt_routing(geometry, keys, slot_for)
    return encapsulations[0].ciphertext, beta, gamma, keys


def kem_wrap(
    geometry: SphinxGeometry,
    path: PathSpec,
    payload: bytes,
    *,
    surb: bytes | None = None,
    suite: KemSuite | None = None,
    rng: EntropySource | None = None,
) -> SphinxPacket:
    plaintext = frame_payload(geometry, payload, surb)
    alpha, beta, gamma, keys = kem_header(geometry, path, suite, rng)
    return SphinxPacket(alpha, beta, gamma, layer_payload(keys, plaintext))


def kem_unwrap(
    geometry: SphinxGeometry,
    private_key: bytes,
    packet: SphinxPacket,
    *,
    suite: KemSuite | None = None,
    replay_cache: ReplayCache | None = None,
    epoch: int = 0,
) -> ForwardEvent | TerminalEvent:
    kem = _suite(geometry, suite)
    packet.check(geometry)
    try:
        shared = kem.decapsulate(private_key, packet.alpha)
    except CryptoError as e:
        raise MacError('decapsulation failed') from e
    keys = derive_hop_keys(shared)
    slot, next_beta = peel_routing(geometry, keys, packet.beta, packet.gamma)
    record_replay(replay_cache, keys, epoch)
    ciphertext_size = geometry.kem_ciphertext_size
    return process_slot(
        geometry,
        keys,
        decode_commands(slot[ciphertext_size:]),
        lambda: slot[:ciphertext_size],
        next_beta,
        packet.delta,
    )
