"""A static, trusted stand-in for the directory authorities.

Holds what clients, couriers and replicas need to agree on: replica identity keys, per-epoch replica
NIKE keys, the weekly shared random values and the link ratings uploaded by heartbeat monitors.
"""

import logging
import math
from dataclasses import dataclass, field

from mixnet_workbench.crypto_core import EntropySource, NikeSuite, hash256
from mixnet_workbench.errors import ConfigError, WorkbenchError

logger = logging.getLogger(__name__)

SECONDS_PER_WEEK = 7 * 24 * 3600.0


class PkiLookupError(WorkbenchError, KeyError):
    pass


@dataclass
class ReplicaDescriptor:
    name: str
    identity_public: bytes
    epoch_public: dict[int, bytes] = field(default_factory=dict)

    @property
    def replica_id(self) -> bytes:
        return hash256(b'replica-id', self.identity_public)


@dataclass
class ReplicaSecrets:
    identity_private: bytes = field(repr=False)
    epoch_private: dict[int, bytes] = field(default_factory=dict, repr=False)


class PkiView:
    def __init__(self, epoch_seconds: float = 1200.0):
        if epoch_seconds <= 0:
            raise ConfigError('epoch length must be positive', field='epoch_seconds')
        self.epoch_seconds = epoch_seconds
        self._replicas: dict[bytes, ReplicaDescriptor] = {}
        self._wsrv: dict[int, bytes] = {}
        self._ratings: dict[int, dict[tuple[str, str], float]] = {}

    def epoch_at(self, now: float) -> int:
        return int(math.floor(now / self.epoch_seconds))

    @staticmethod
    def week_at(now: float) -> int:
        return int(math.floor(now / SECONDS_PER_WEEK))

    # Replicas

    def register_replica(self, descriptor: ReplicaDescriptor):
        self._replicas[descriptor.replica_id] = descriptor

    def remove_replica(self, replica_id: bytes):
        self._replicas.pop(replica_id, None)

    def replica(self, replica_id: bytes) -> ReplicaDescriptor:
        try:
            return self._replicas[replica_id]
        except KeyError as e:
            raise PkiLookupError(f'replica {replica_id.hex()[:16]} is not in the PKI') from e

    def replicas(self) -> list[ReplicaDescriptor]:
        return list(self._replicas.values())

    def replica_epoch_key(self, replica_id: bytes, epoch: int) -> bytes:
        descriptor = self.replica(replica_id)
        try:
            return descriptor.epoch_public[epoch]
        except KeyError as e:
            raise PkiLookupError(f'replica {descriptor.name} published no key for epoch {epoch}') from e

    # Weekly shared random values

    def publish_wsrv(self, week: int, value: bytes):
        self._wsrv[week] = value
        logger.info(f'WSRV published for week {week}')

    def wsrv(self, week: int) -> bytes:
        try:
            return self._wsrv[week]
        except KeyError as e:
            raise PkiLookupError(f'no WSRV for week {week}') from e

    def latest_week(self) -> int:
        if not self._wsrv:
            raise PkiLookupError('no WSRV has been published')
        return max(self._wsrv)

    # Link ratings

    def upload_ratings(self, epoch: int, ratings: dict[tuple[str, str], float]):
        self._ratings.setdefault(epoch, {}).update(ratings)

    def ratings(self, epoch: int) -> dict[tuple[str, str], float]:
        return dict(self._ratings.get(epoch, {}))

    def rating_epochs(self) -> list[int]:
        return sorted(self._ratings)


def provision_replica(
    pki: PkiView,
    name: str,
    suite: NikeSuite,
    rng: EntropySource,
    epochs: range,
) -> tuple[ReplicaDescriptor, ReplicaSecrets]:
    """Generate identity and per-epoch keys for a replica and publish the public halves."""
    identity_private, identity_public = suite.generate_keypair(rng)
    descriptor = ReplicaDescriptor(name, identity_public)
    secrets = ReplicaSecrets(identity_private)
    for epoch in epochs:
        private, public = suite.generate_keypair(rng)
        descriptor.epoch_public[epoch] = public
        secrets.epoch_private[epoch] = private
    pki.register_replica(descriptor)
    return descriptor, secrets
