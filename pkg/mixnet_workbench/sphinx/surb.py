"""Single-use reply blocks.

A SURB is ``first_hop(32) ‖ header ‖ key_material(64)``. The replier encrypts the framed reply under
the key material and sends it to the first hop with the prebuilt header; every reply hop then strips its
own SPRP layer as usual. Only the creator, holding each hop's payload key, can undo all layers.
"""

import logging
import threading
from dataclasses import dataclass, field

from mixnet_workbench.crypto_core import KEY_MATERIAL_SIZE, EntropySource, KemSuite, NikeSuite, WideBlockCipher, read_entropy
from mixnet_workbench.sphinx.errors import GeometryError, SurbReuseError, UnknownSurbError
from mixnet_workbench.sphinx.sizes import NODE_ID_SIZE, SURB_ID_SIZE, SphinxGeometry
from mixnet_workbench.sphinx.kem_sphinx import kem_header
from mixnet_workbench.sphinx.nike_sphinx import nike_header
from mixnet_workbench.sphinx.packet import PathSpec, SphinxPacket, frame_payload, unframe_payload

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Surb:
    first_hop: bytes
    header: bytes
    key_material: bytes = field(repr=False)

    def to_bytes(self) -> bytes:
        return self.first_hop + self.header + self.key_material

    @classmethod
    def from_bytes(cls, geometry: SphinxGeometry, data: bytes) -> 'Surb':
        if len(data) != geometry.surb_size:
            raise GeometryError(f'SURB is {len(data)} bytes, geometry expects {geometry.surb_size}')
        header_end = NODE_ID_SIZE + geometry.header_size
        return cls(data[:NODE_ID_SIZE], data[NODE_ID_SIZE:header_end], data[header_end:])


@dataclass(frozen=True)
class SurbKeySet:
    surb_id: bytes
    key_material: bytes = field(repr=False)
    hop_payload_keys: tuple[bytes, ...] = field(repr=False)


def surb_create(
    geometry: SphinxGeometry,
    reply_path: PathSpec,
    *,
    suite: NikeSuite | KemSuite | None = None,
    rng: EntropySource | None = None,
) -> tuple[Surb, SurbKeySet]:
    surb_id = reply_path.surb_id or read_entropy(rng, SURB_ID_SIZE)
    path = PathSpec(reply_path.hops, reply_path.recipient_id, surb_id)
    build = nike_header if geometry.kind == 'nike' else kem_header
    alpha, beta, gamma, keys = build(geometry, path, suite, rng)
    key_material = read_entropy(rng, KEY_MATERIAL_SIZE)
    surb = Surb(path.hops[0].node_id, alpha + beta + gamma, key_material)
    return surb, SurbKeySet(surb_id, key_material, tuple(k.payload_key for k in keys))


def surb_reply(geometry: SphinxGeometry, surb: Surb, payload: bytes) -> tuple[bytes, SphinxPacket]:
    """Return ``(first_hop, packet)``; the replier learns nothing beyond the first hop."""
    delta = WideBlockCipher(surb.key_material).encrypt(frame_payload(geometry, payload))
    return surb.first_hop, SphinxPacket.from_header(geometry, surb.header, delta)


def surb_open(geometry: SphinxGeometry, key_set: SurbKeySet, delta: bytes) -> bytes:
    for payload_key in reversed(key_set.hop_payload_keys):
        delta = WideBlockCipher(payload_key).encrypt(delta)
    payload, _ = unframe_payload(geometry, WideBlockCipher(key_set.key_material).decrypt(delta))
    return payload


class SurbKeyring:
    """Creator-side registry enforcing single use of every SURB it issued."""

    def __init__(self, geometry: SphinxGeometry):
        self.geometry = geometry
        self._lock = threading.Lock()
        self._pending: dict[bytes, SurbKeySet] = {}
        self._consumed: set[bytes] = set()

    def register(self, key_set: SurbKeySet):
        with self._lock:
            self._pending[key_set.surb_id] = key_set

    def create(self, reply_path: PathSpec, **kwargs) -> Surb:
        surb, key_set = surb_create(self.geometry, reply_path, **kwargs)
        self.register(key_set)
        return surb

    def consume(self, surb_id: bytes) -> SurbKeySet:
        with self._lock:
            if surb_id in self._consumed:
                logger.warning(f'Second reply for SURB {surb_id.hex()} rejected')
                raise SurbReuseError('SURB was already used')
            try:
                key_set = self._pending.pop(surb_id)
            except KeyError as e:
                raise UnknownSurbError(f'no key set for SURB {surb_id.hex()}') from e
            self._consumed.add(surb_id)
            return key_set

    def __contains__(self, surb_id: bytes) -> bool:
        with self._lock:
            return surb_id in self._pending


def surb_decrypt(keyring: SurbKeyring, surb_id: bytes, delta: bytes) -> bytes:
    return surb_open(keyring.geometry, keyring.consume(surb_id), delta)
