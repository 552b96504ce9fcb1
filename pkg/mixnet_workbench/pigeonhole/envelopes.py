"""Courier envelopes and replica replies.

Envelope wire format, all integers big-endian:

    kind(1) ‖ epoch(8) ‖ ephemeral_public(32) ‖ pq_slot(128) ‖ count(1)
    ‖ count × (replica_id(32) ‖ encrypted_dek(49)) ‖ enveloped_length(4) ‖ enveloped

``pq_slot`` is the reserved post-quantum key slot; it carries random filler here. Each encrypted DEK
seals the 256-bit data-encryption key under a key derived from the X25519 secret between the ephemeral
key and that replica's epoch key. The enveloped message is sealed under the DEK: a serialized box for
writes, a box ID for reads. A courier can route on everything before ``enveloped`` and nothing more.

Reply wire format: ``nonce(12) ‖ AEAD(reply_key, status(1) ‖ box_length(4) ‖ box ‖ zero padding)``.
Every reply for a given maximum box size has the same length, positive or negative.
"""

from dataclasses import dataclass
from enum import IntEnum

from mixnet_workbench.bacap import BacapBox, EncodingError
from mixnet_workbench.crypto_core import (
    AuthenticationError,
    CryptoError,
    EntropySource,
    KdfState,
    NikeSuite,
    X25519Nike,
    aead_open,
    aead_seal,
    hash256,
    kdf_expand,
    nonce_for,
    read_entropy,
)
from mixnet_workbench.crypto_core.aead import KEY_SIZE, NONCE_SIZE, OVERHEAD
from mixnet_workbench.pigeonhole.errors import EnvelopeError

PQ_SLOT_SIZE = 128
REPLICA_ID_SIZE = 32
DEK_SIZE = KEY_SIZE
ENCRYPTED_DEK_SIZE = DEK_SIZE + OVERHEAD
BOX_OVERHEAD = 32 + 4 + 64
_FIXED_SIZE = 1 + 8 + 32 + PQ_SLOT_SIZE + 1
_ENTRY_SIZE = REPLICA_ID_SIZE + ENCRYPTED_DEK_SIZE

_DEFAULT_NIKE = X25519Nike()


class EnvelopeKind(IntEnum):
    WRITE = 1
    READ = 2


class ReplyStatus(IntEnum):
    FOUND = 1
    NOT_FOUND = 2


@dataclass(frozen=True)
class CourierEnvelope:
    kind: EnvelopeKind
    epoch: int
    ephemeral_public: bytes
    pq_slot: bytes
    replica_ids: tuple[bytes, ...]
    encrypted_deks: tuple[bytes, ...]
    enveloped: bytes

    def to_bytes(self) -> bytes:
        entries = b''.join(rid + dek for rid, dek in zip(self.replica_ids, self.encrypted_deks))
        return (
            bytes([self.kind])
            + self.epoch.to_bytes(8, 'big')
            + self.ephemeral_public
            + self.pq_slot
            + bytes([len(self.replica_ids)])
            + entries
            + len(self.enveloped).to_bytes(4, 'big')
            + self.enveloped
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> 'CourierEnvelope':
        if len(data) < _FIXED_SIZE + 4:
            raise EnvelopeError('envelope is truncated')
        try:
            kind = EnvelopeKind(data[0])
        except ValueError as e:
            raise EnvelopeError(f'unknown envelope kind {data[0]}') from e
        epoch = int.from_bytes(data[1:9], 'big')
        ephemeral = data[9:41]
        pq_slot = data[41 : 41 + PQ_SLOT_SIZE]
        count = data[_FIXED_SIZE - 1]
        offset = _FIXED_SIZE
        end_entries = offset + count * _ENTRY_SIZE
        if count == 0 or len(data) < end_entries + 4:
            raise EnvelopeError('envelope carries no complete replica entries')
        ids, deks = [], []
        for i in range(count):
            entry = data[offset + i * _ENTRY_SIZE : offset + (i + 1) * _ENTRY_SIZE]
            ids.append(entry[:REPLICA_ID_SIZE])
            deks.append(entry[REPLICA_ID_SIZE:])
        length = int.from_bytes(data[end_entries : end_entries + 4], 'big')
        enveloped = data[end_entries + 4 :]
        if len(enveloped) != length:
            raise EnvelopeError('enveloped length field does not match the encoding')
        return cls(kind, epoch, ephemeral, pq_slot, tuple(ids), tuple(deks), enveloped)

    @property
    def digest(self) -> bytes:
        return hash256(b'pigeonhole/envelope', self.to_bytes())


def _key_encryption_key(shared: bytes, ephemeral_public: bytes, replica_id: bytes) -> bytes:
    return kdf_expand(KdfState(hash256(b'pigeonhole/kek', shared, ephemeral_public, replica_id)), b'kek', 1)[0]


def _enveloped_nonce(ephemeral_public: bytes) -> bytes:
    return nonce_for(b'pigeonhole/enveloped' + ephemeral_public)


def seal_envelope(
    kind: EnvelopeKind,
    inner: bytes,
    replicas: list[tuple[bytes, bytes]],
    epoch: int,
    rng: EntropySource | None = None,
    nike: NikeSuite = _DEFAULT_NIKE,
) -> tuple[CourierEnvelope, bytes]:
    """Seal ``inner`` for the given ``(replica_id, epoch_public_key)`` pairs; returns the envelope and DEK."""
    if not replicas:
        raise EnvelopeError('an envelope needs at least one replica')
    ephemeral_private, ephemeral_public = nike.generate_keypair(rng)
    dek = read_entropy(rng, DEK_SIZE)
    ids, deks = [], []
    for replica_id, epoch_public in replicas:
        shared = nike.exchange(ephemeral_private, epoch_public)
        kek = _key_encryption_key(shared, ephemeral_public, replica_id)
        ids.append(replica_id)
        deks.append(aead_seal(kek, nonce_for(b'pigeonhole/dek' + replica_id), dek, ephemeral_public))
    enveloped = aead_seal(dek, _enveloped_nonce(ephemeral_public), inner, bytes([kind]))
    envelope = CourierEnvelope(
        kind, epoch, ephemeral_public, read_entropy(rng, PQ_SLOT_SIZE), tuple(ids), tuple(deks), enveloped
    )
    return envelope, dek


def open_envelope(
    envelope: CourierEnvelope,
    replica_id: bytes,
    epoch_private: bytes,
    nike: NikeSuite = _DEFAULT_NIKE,
) -> tuple[bytes, bytes]:
    """Return ``(inner, dek)`` for the replica named ``replica_id``."""
    try:
        position = envelope.replica_ids.index(replica_id)
    except ValueError as e:
        raise EnvelopeError('envelope is not addressed to this replica') from e
    try:
        shared = nike.exchange(epoch_private, envelope.ephemeral_public)
        kek = _key_encryption_key(shared, envelope.ephemeral_public, replica_id)
        dek = aead_open(
            kek, nonce_for(b'pigeonhole/dek' + replica_id), envelope.encrypted_deks[position], envelope.ephemeral_public
        )
        inner = aead_open(dek, _enveloped_nonce(envelope.ephemeral_public), envelope.enveloped, bytes([envelope.kind]))
    except (AuthenticationError, CryptoError) as e:
        raise EnvelopeError('envelope does not decrypt under this replica key') from e
    return inner, dek


def write_envelope_size(box_payload_size: int, replicas: int = 2) -> int:
    box = BOX_OVERHEAD + box_payload_size + OVERHEAD
    return _FIXED_SIZE + replicas * _ENTRY_SIZE + 4 + box + OVERHEAD


def reply_key(dek: bytes) -> bytes:
    return kdf_expand(KdfState(hash256(b'pigeonhole/reply', dek)), b'reply', 1)[0]


def reply_plaintext_size(max_box_payload: int) -> int:
    return 1 + 4 + BOX_OVERHEAD + max_box_payload + OVERHEAD


def reply_size(max_box_payload: int) -> int:
    return NONCE_SIZE + reply_plaintext_size(max_box_payload) + OVERHEAD


def seal_reply(
    dek: bytes,
    status: ReplyStatus,
    box: BacapBox | None,
    max_box_payload: int,
    rng: EntropySource | None = None,
) -> bytes:
    body = box.to_bytes() if box is not None else b''
    size = reply_plaintext_size(max_box_payload)
    plaintext = bytes([status]) + len(body).to_bytes(4, 'big') + body
    if len(plaintext) > size:
        raise EnvelopeError(f'box of {len(body)} bytes does not fit a {size}-byte reply')
    nonce = read_entropy(rng, NONCE_SIZE)
    return nonce + aead_seal(reply_key(dek), nonce, plaintext.ljust(size, b'\x00'))


def open_reply(dek: bytes, data: bytes) -> tuple[ReplyStatus, BacapBox | None]:
    try:
        plaintext = aead_open(reply_key(dek), data[:NONCE_SIZE], data[NONCE_SIZE:])
        status = ReplyStatus(plaintext[0])
        length = int.from_bytes(plaintext[1:5], 'big')
        box = BacapBox.from_bytes(plaintext[5 : 5 + length]) if length else None
    except (AuthenticationError, ValueError, EncodingError) as e:
        raise EnvelopeError('reply does not open under this envelope key') from e
    return status, box
