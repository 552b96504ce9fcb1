"""Replica state machine.

A replica plays two roles. As an intermediate replica it opens write envelopes, checks the box, persists
it in its outbox and becomes responsible for delivering it to the k final replicas. As a final replica it
stores boxes in the current week bucket, applying tombstone precedence, and answers reads.
"""

import logging
from dataclasses import dataclass
from enum import Enum

from mixnet_workbench.bacap import BacapBox, EncodingError, verify
from mixnet_workbench.crypto_core import EntropySource, NikeSuite, X25519Nike, hash256
from mixnet_workbench.pigeonhole.envelopes import (
    CourierEnvelope,
    EnvelopeKind,
    ReplyStatus,
    open_envelope,
    seal_reply,
)
from mixnet_workbench.pigeonhole.errors import BoxRejectedError, EnvelopeError, TombstonePrecedenceError
from mixnet_workbench.pigeonhole.sharding import ShardMap
from mixnet_workbench.pigeonhole.store import ReplicaStore
from mixnet_workbench.pki import ReplicaDescriptor, ReplicaSecrets

logger = logging.getLogger(__name__)

COPY_ID_SIZE = 16
_OUTBOX_MARK = b'\x01'
_COPY_MARK = b'\x02'


class StoreOutcome(Enum):
    STORED = 'stored'
    REPLACED = 'replaced'
    DUPLICATE = 'duplicate'


@dataclass(frozen=True)
class Forward:
    """Delivery duty for one box to its final replicas, tracked under ``outbox_id``."""

    outbox_id: bytes
    box: BacapBox
    finals: tuple[bytes, ...]


@dataclass(frozen=True)
class PendingRead:
    box_id: bytes
    dek: bytes
    request_ref: int
    courier: str
    delay: float


@dataclass(frozen=True)
class ReadReply:
    request_ref: int
    courier: str
    reply: bytes
    found: bool


class Replica:
    def __init__(
        self,
        descriptor: ReplicaDescriptor,
        secrets: ReplicaSecrets,
        store: ReplicaStore,
        shard_map: ShardMap,
        rng: EntropySource,
        max_box_payload: int,
        pending_delay: tuple[float, float] = (1.0, 30.0),
        nike: NikeSuite | None = None,
    ):
        self.descriptor = descriptor
        self.secrets = secrets
        self.store = store
        self.shard_map = shard_map
        self.rng = rng
        self.max_box_payload = max_box_payload
        self.pending_delay = pending_delay
        self.nike = nike or X25519Nike()
        self.pending: dict[bytes, list[PendingRead]] = {}
        self.requests_seen = 0

    @property
    def name(self) -> str:
        return self.descriptor.name

    @property
    def replica_id(self) -> bytes:
        return self.descriptor.replica_id

    def _open(self, envelope: CourierEnvelope, kind: EnvelopeKind) -> tuple[bytes, bytes]:
        if envelope.kind != kind:
            raise EnvelopeError(f'expected a {kind.name.lower()} envelope')
        try:
            epoch_private = self.secrets.epoch_private[envelope.epoch]
        except KeyError as e:
            raise EnvelopeError(f'{self.name} holds no key for epoch {envelope.epoch}') from e
        return open_envelope(envelope, self.replica_id, epoch_private, self.nike)

    @staticmethod
    def _box(data: bytes) -> BacapBox:
        try:
            box = BacapBox.from_bytes(data)
        except EncodingError as e:
            raise BoxRejectedError('box encoding is malformed') from e
        if not verify(box):
            raise BoxRejectedError('box signature does not verify')
        return box

    # Intermediate role

    def accept_write(self, envelope: CourierEnvelope) -> Forward:
        """Open, verify and persist a write; the caller acks the courier and delivers the returned duty."""
        self.requests_seen += 1
        inner, _ = self._open(envelope, EnvelopeKind.WRITE)
        box = self._box(inner)
        return self._take_responsibility(box)

    def _take_responsibility(self, box: BacapBox) -> Forward:
        outbox_id = hash256(b'pigeonhole/outbox', box.to_bytes())
        self.store.stage(outbox_id, _OUTBOX_MARK + box.to_bytes())
        return Forward(outbox_id, box, tuple(self.shard_map.select(box.box_id)))

    def delivered(self, outbox_id: bytes):
        self.store.unstage(outbox_id)

    def outbox(self) -> list[Forward]:
        """Undelivered duties, e.g. after recovering from a crash."""
        duties = []
        for staging_id, (_, payload) in self.store.staged.items():
            if payload[:1] == _OUTBOX_MARK:
                box = BacapBox.from_bytes(payload[1:])
                duties.append(Forward(staging_id, box, tuple(self.shard_map.select(box.box_id))))
        return duties

    # Two-phase copy staging

    def stage_copy(self, copy_id: bytes, envelope: CourierEnvelope) -> bytes:
        """Verify a copied write and hold it under ``copy_id`` without forwarding it."""
        self.requests_seen += 1
        inner, _ = self._open(envelope, EnvelopeKind.WRITE)
        box = self._box(inner)
        staging_id = hash256(b'pigeonhole/copy', copy_id, box.box_id)
        self.store.stage(staging_id, _COPY_MARK + copy_id + box.to_bytes())
        return staging_id

    def _staged_for(self, copy_id: bytes) -> list[tuple[bytes, BacapBox]]:
        found = []
        for staging_id, (_, payload) in self.store.staged.items():
            if payload[:1] == _COPY_MARK and payload[1 : 1 + COPY_ID_SIZE] == copy_id:
                found.append((staging_id, BacapBox.from_bytes(payload[1 + COPY_ID_SIZE :])))
        return found

    def commit_copy(self, copy_id: bytes) -> list[Forward]:
        duties = []
        for staging_id, box in self._staged_for(copy_id):
            self.store.unstage(staging_id)
            duties.append(self._take_responsibility(box))
        if duties:
            logger.info(f'{self.name} committed copy {copy_id.hex()[:8]} with {len(duties)} writes')
        return duties

    def discard_copy(self, copy_id: bytes) -> int:
        staged = self._staged_for(copy_id)
        for staging_id, _ in staged:
            self.store.unstage(staging_id)
        if staged:
            logger.info(f'{self.name} discarded {len(staged)} staged writes of copy {copy_id.hex()[:8]}')
        return len(staged)

    # Final role

    def store_final(self, box: BacapBox) -> tuple[StoreOutcome, list[PendingRead]]:
        if not verify(box):
            raise BoxRejectedError('box signature does not verify')
        existing = self.store.get(box.box_id)
        if existing == box:
            return StoreOutcome.DUPLICATE, []
        if existing is not None:
            if existing.is_tombstone:
                raise TombstonePrecedenceError(f'{self.name}: box {box.box_id.hex()[:16]} is tombstoned')
            if not box.is_tombstone:
                raise BoxRejectedError(f'{self.name}: box {box.box_id.hex()[:16]} is already written')
        self.store.put(box)
        fired = self.pending.pop(box.box_id, [])
        return (StoreOutcome.REPLACED if existing is not None else StoreOutcome.STORED), fired

    def serve_read(self, envelope: CourierEnvelope, courier: str, request_ref: int) -> ReadReply:
        """Answer with the box or a negative acknowledgement; a miss also registers a pending read."""
        self.requests_seen += 1
        box_id, dek = self._open(envelope, EnvelopeKind.READ)
        box = self.store.get(box_id)
        if box is None:
            low, high = self.pending_delay
            delay = low + (high - low) * (int.from_bytes(self.rng.randbytes(8), 'big') / 2**64)
            self.pending.setdefault(box_id, []).append(PendingRead(box_id, dek, request_ref, courier, delay))
        return self.reply(dek, box, courier, request_ref)

    def reply(self, dek: bytes, box: BacapBox | None, courier: str, request_ref: int) -> ReadReply:
        status = ReplyStatus.FOUND if box is not None else ReplyStatus.NOT_FOUND
        sealed = seal_reply(dek, status, box, self.max_box_payload, self.rng)
        return ReadReply(request_ref, courier, sealed, box is not None)

    def fire(self, pending: PendingRead) -> ReadReply:
        return self.reply(pending.dek, self.store.get(pending.box_id), pending.courier, pending.request_ref)

    # Lifecycle

    def open_week(self, week: int) -> list[int]:
        return self.store.open_week(week)

    def crash(self):
        """Lose volatile state; the store survives."""
        self.pending.clear()

