"""Courier state machine: envelope dedup and the response cache.

The courier keys everything on the envelope digest. It sees envelope kinds, replica ids and opaque
replies, never a box ID. A resent envelope is answered from the cache through the new SURB; the replica
is contacted once per envelope for as long as the cache entry lives.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

from mixnet_workbench.pigeonhole.envelopes import CourierEnvelope, EnvelopeKind

logger = logging.getLogger(__name__)


class EntryState(Enum):
    IN_FLIGHT = 'in_flight'
    ANSWERED = 'answered'


@dataclass
class CacheEntry:
    kind: EnvelopeKind
    replica_ids: tuple[bytes, ...]
    expires: float
    state: EntryState = EntryState.IN_FLIGHT
    response: bytes | None = None
    waiting: list[bytes] = field(default_factory=list)
    replica_requests: int = 0


class Decision(Enum):
    FORWARD = 'forward'
    REPLY = 'reply'
    WAIT = 'wait'


class CourierState:
    def __init__(self, name: str, cache_ttl: float = 1200.0):
        self.name = name
        self.cache_ttl = cache_ttl
        self.cache: dict[bytes, CacheEntry] = {}
        self.copies_executed = 0
        self.items_copied = 0

    def _expire(self, now: float):
        for digest in [d for d, entry in self.cache.items() if entry.expires <= now]:
            del self.cache[digest]

    def accept(self, envelope: CourierEnvelope, surb_id: bytes, now: float) -> tuple[Decision, bytes | None]:
        """Decide what to do with an incoming request carrying a fresh SURB."""
        self._expire(now)
        digest = envelope.digest
        entry = self.cache.get(digest)
        if entry is None:
            self.cache[digest] = CacheEntry(envelope.kind, envelope.replica_ids, now + self.cache_ttl, waiting=[surb_id])
            return Decision.FORWARD, None
        if entry.state is EntryState.ANSWERED:
            logger.debug(f'{self.name}: resend answered from cache')
            return Decision.REPLY, entry.response
        entry.waiting.append(surb_id)
        return Decision.WAIT, None

    def record_response(self, digest: bytes, response: bytes, now: float) -> list[bytes]:
        """Store the latest response; returns the SURB ids it should be sent through."""
        entry = self.cache.get(digest)
        if entry is None:
            return []
        entry.state = EntryState.ANSWERED
        entry.response = response
        entry.expires = max(entry.expires, now + self.cache_ttl)
        waiting, entry.waiting = entry.waiting, []
        return waiting

    def forget(self, digest: bytes):
        self.cache.pop(digest, None)

    def observable_state(self) -> list[dict]:
        """Everything the courier holds per envelope."""
        return [
            {
                'digest': digest,
                'kind': entry.kind.name,
                'replica_ids': entry.replica_ids,
                'state': entry.state.value,
                'response': entry.response,
            }
            for digest, entry in self.cache.items()
        ]
