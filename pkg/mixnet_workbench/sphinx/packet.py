"""Packet types and the routing-information machinery shared by the NIKE and KEM variants."""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

from mixnet_workbench.crypto_core import (
    KdfState,
    WideBlockCipher,
    hash256,
    kdf_expand,
    mac,
    mac_equal,
    stream,
    xor_bytes,
)
from mixnet_workbench.sphinx.commands import (
    NextHop,
    NodeDelay,
    Recipient,
    RoutingCommand,
    SurbReply,
    decode_commands,
    encode_commands,
)
from mixnet_workbench.sphinx.errors import CommandError, GeometryError, MacError, PayloadIntegrityError, ReplayError
from mixnet_workbench.sphinx.sizes import (
    NODE_ID_SIZE,
    PAYLOAD_FLAGS_SIZE,
    PAYLOAD_TAG_SIZE,
    PREFIX_SIZE,
    SURB_ID_SIZE,
    SphinxGeometry,
)
from mixnet_workbench.sphinx.replay import ReplayCache

logger = logging.getLogger(__name__)

HEADER_PREFIX = b'\x00\x00'
FLAG_SURB = 0x0001
_ZERO_TAG = b'\x00' * PAYLOAD_TAG_SIZE


@dataclass(frozen=True)
class SphinxPacket:
    alpha: bytes
    beta: bytes
    gamma: bytes
    delta: bytes

    @property
    def header(self) -> bytes:
        return self.alpha + self.beta + self.gamma

    def to_bytes(self) -> bytes:
        return self.alpha + self.beta + self.gamma + self.delta

    @classmethod
    def from_bytes(cls, geometry: SphinxGeometry, data: bytes) -> 'SphinxPacket':
        if len(data) != geometry.packet_size:
            raise GeometryError(f'packet is {len(data)} bytes, geometry expects {geometry.packet_size}')
        header, delta = data[: geometry.header_size], data[geometry.header_size :]
        return cls.from_header(geometry, header, delta)

    @classmethod
    def from_header(cls, geometry: SphinxGeometry, header: bytes, delta: bytes) -> 'SphinxPacket':
        a, b = geometry.alpha_size, geometry.alpha_size + geometry.beta_size
        return cls(header[:a], header[a:b], header[b:], delta)

    def check(self, geometry: SphinxGeometry):
        sizes = (len(self.alpha), len(self.beta), len(self.gamma), len(self.delta))
        expected = (geometry.alpha_size, geometry.beta_size, geometry.gamma_size, geometry.delta_size)
        if sizes != expected:
            raise GeometryError(f'packet sections {sizes} do not match geometry {expected}')


@dataclass(frozen=True)
class PathHop:
    node_id: bytes
    public_key: bytes
    delay_ms: int = 0

    def __post_init__(self):
        if len(self.node_id) != NODE_ID_SIZE:
            raise CommandError(f'node id must be {NODE_ID_SIZE} bytes')


@dataclass(frozen=True)
class PathSpec:
    hops: tuple[PathHop, ...]
    recipient_id: bytes
    surb_id: bytes | None = None

    def __post_init__(self):
        object.__setattr__(self, 'hops', tuple(self.hops))
        if self.surb_id is not None and len(self.surb_id) != SURB_ID_SIZE:
            raise CommandError(f'SURB id must be {SURB_ID_SIZE} bytes')

    def check(self, geometry: SphinxGeometry):
        if not 1 <= len(self.hops) <= geometry.max_hops:
            raise GeometryError(f'path has {len(self.hops)} hops; geometry allows 1..{geometry.max_hops}')

    def terminal_commands(self) -> list[RoutingCommand]:
        commands: list[RoutingCommand] = [Recipient(self.recipient_id)]
        if self.surb_id is not None:
            commands.append(SurbReply(self.surb_id))
        return commands


@dataclass(frozen=True)
class HopKeys:
    header_mac: bytes = field(repr=False)
    stream_key: bytes = field(repr=False)
    payload_key: bytes = field(repr=False)
    blinding: bytes = field(repr=False)
    replay_tag: bytes


def derive_hop_keys(shared_secret: bytes, blinding_size: int = 32) -> HopKeys:
    outputs = kdf_expand(KdfState(hash256(b'sphinx/hop', shared_secret)), b'sphinx/hop-keys', 7)
    return HopKeys(
        header_mac=outputs[0],
        stream_key=outputs[1],
        payload_key=outputs[2] + outputs[3],
        replay_tag=outputs[4],
        blinding=(outputs[5] + outputs[6])[:blinding_size],
    )


@dataclass(frozen=True)
class ForwardEvent:
    next_hop: bytes
    packet: SphinxPacket
    delay_ms: int


@dataclass(frozen=True)
class TerminalEvent:
    recipient_id: bytes
    surb_id: bytes | None
    payload: bytes | None
    surb: bytes | None
    delta: bytes

    @property
    def is_reply(self) -> bool:
        return self.surb_id is not None


def forward_commands(hop: PathHop, next_hop: PathHop, next_gamma: bytes) -> list[RoutingCommand]:
    return [NextHop(next_hop.node_id, next_gamma), NodeDelay(hop.delay_ms)]


def encrypt_routing(
    geometry: SphinxGeometry,
    keys: list[HopKeys],
    slot_for: Callable[[int, bytes | None], bytes],
) -> tuple[bytes, bytes]:
    """Build β and γ for the first hop.

    ``slot_for(i, next_gamma)`` returns hop i's plaintext slot; ``next_gamma`` is None for the
    terminal hop. Unused slots are zeros under the terminal hop's stream, and the filler makes every
    hop see a correctly sized β after shifting.
    """
    n = len(keys)
    size, slot = geometry.routing_info_size, geometry.slot_size
    streams = [stream(k.stream_key, size + slot) for k in keys]

    filler = b''
    for i in range(1, n):
        filler = xor_bytes(filler + bytes(slot), streams[i - 1][size + slot - i * slot :])

    terminal = slot_for(n - 1, None) + bytes(size - n * slot)
    routing = xor_bytes(terminal, streams[n - 1][: size - (n - 1) * slot]) + filler
    gamma = mac(keys[n - 1].header_mac, HEADER_PREFIX + routing)
    for i in range(n - 2, -1, -1):
        plain = slot_for(i, gamma) + routing[: size - slot]
        routing = xor_bytes(plain, streams[i][:size])
        gamma = mac(keys[i].header_mac, HEADER_PREFIX + routing)
    return HEADER_PREFIX + routing, gamma


def peel_routing(geometry: SphinxGeometry, keys: HopKeys, beta: bytes, gamma: bytes) -> tuple[bytes, bytes]:
    """Verify γ and strip one slot from β; returns ``(slot_plaintext, next_beta)``."""
    if not mac_equal(mac(keys.header_mac, beta), gamma):
        raise MacError('header MAC does not verify')
    if beta[:PREFIX_SIZE] != HEADER_PREFIX:
        raise MacError('unsupported header version')
    size, slot = geometry.routing_info_size, geometry.slot_size
    decrypted = xor_bytes(beta[PREFIX_SIZE:] + bytes(slot), stream(keys.stream_key, size + slot))
    return decrypted[:slot], HEADER_PREFIX + decrypted[slot:]


def record_replay(replay_cache: ReplayCache | None, keys: HopKeys, epoch: int):
    if replay_cache is not None and not replay_cache.check_and_insert(keys.replay_tag, epoch):
        logger.warning(f'Replay detected for tag {keys.replay_tag.hex()[:16]} in epoch {epoch}')
        raise ReplayError('packet was already processed in this epoch')


def frame_payload(geometry: SphinxGeometry, payload: bytes, surb: bytes | None = None) -> bytes:
    if len(payload) > geometry.payload_size:
        raise GeometryError(f'payload is {len(payload)} bytes; geometry carries {geometry.payload_size}')
    if surb is not None and len(surb) != geometry.surb_size:
        raise GeometryError('SURB does not match the geometry')
    flags = FLAG_SURB if surb is not None else 0
    return (
        _ZERO_TAG
        + flags.to_bytes(PAYLOAD_FLAGS_SIZE, 'big')
        + (surb if surb is not None else bytes(geometry.surb_size))
        + payload.ljust(geometry.payload_size, b'\x00')
    )


def unframe_payload(geometry: SphinxGeometry, plaintext: bytes) -> tuple[bytes, bytes | None]:
    if plaintext[:PAYLOAD_TAG_SIZE] != _ZERO_TAG:
        raise PayloadIntegrityError('payload integrity tag does not verify')
    offset = PAYLOAD_TAG_SIZE
    flags = int.from_bytes(plaintext[offset : offset + PAYLOAD_FLAGS_SIZE], 'big')
    offset += PAYLOAD_FLAGS_SIZE
    surb = plaintext[offset : offset + geometry.surb_size] if flags & FLAG_SURB else None
    offset += geometry.surb_size
    return plaintext[offset:], surb


def layer_payload(keys: list[HopKeys], plaintext: bytes) -> bytes:
    delta = plaintext
    for hop_keys in reversed(keys):
        delta = WideBlockCipher(hop_keys.payload_key).encrypt(delta)
    return delta


def process_slot(
    geometry: SphinxGeometry,
    keys: HopKeys,
    commands: list[RoutingCommand],
    next_alpha: Callable[[], bytes],
    next_beta: bytes,
    delta: bytes,
) -> ForwardEvent | TerminalEvent:
    delta = WideBlockCipher(keys.payload_key).decrypt(delta)
    next_hop = next((c for c in commands if isinstance(c, NextHop)), None)
    if next_hop is not None:
        delay = next((c.delay_ms for c in commands if isinstance(c, NodeDelay)), 0)
        packet = SphinxPacket(next_alpha(), next_beta, next_hop.mac, delta)
        return ForwardEvent(next_hop.node_id, packet, delay)

    recipient = next((c for c in commands if isinstance(c, Recipient)), None)
    if recipient is None:
        raise CommandError('terminal slot carries no recipient')
    surb_reply = next((c for c in commands if isinstance(c, SurbReply)), None)
    if surb_reply is not None:
        # Reply payloads stay encrypted for the SURB creator.
        return TerminalEvent(recipient.recipient_id, surb_reply.surb_id, None, None, delta)
    payload, surb = unframe_payload(geometry, delta)
    return TerminalEvent(recipient.recipient_id, None, payload, surb, delta)


__all__ = [
    'SphinxPacket',
    'PathHop',
    'PathSpec',
    'HopKeys',
    'ForwardEvent',
    'TerminalEvent',
    'derive_hop_keys',
    'encrypt_routing',
    'peel_routing',
    'record_replay',
    'frame_payload',
    'unframe_payload',
    'layer_payload',
    'process_slot',
    'forward_commands',
    'decode_commands',
    'encode_commands',
]
