"""Consistent-hash selection of the replicas responsible for a box.

Replicas are ordered by ``hash256(identity_key ‖ box_id)`` and the first k are taken. Removing a replica
only moves the boxes it was responsible for, about k/n of them.
"""

from collections.abc import Iterable
from dataclasses import dataclass

from mixnet_workbench.crypto_core import hash256
from mixnet_workbench.pigeonhole.errors import ShardingError


@dataclass(frozen=True)
class ReplicaEntry:
    replica_id: bytes
    public_key: bytes


class ShardMap:
    def __init__(self, replicas: Iterable[ReplicaEntry | tuple[bytes, bytes]], k: int = 2):
        self.replicas = tuple(r if isinstance(r, ReplicaEntry) else ReplicaEntry(*r) for r in replicas)
        if len({r.replica_id for r in self.replicas}) != len(self.replicas):
            raise ShardingError('replica ids must be distinct')
        if k < 1:
            raise ShardingError('replication factor must be at least 1')
        self.k = k

    def __len__(self) -> int:
        return len(self.replicas)

    def select(self, box_id: bytes) -> list[bytes]:
        if self.k > len(self.replicas):
            raise ShardingError(f'replication factor {self.k} exceeds the {len(self.replicas)} known replicas')
        ranked = sorted(self.replicas, key=lambda r: hash256(b'shard', r.public_key, box_id))
        return [r.replica_id for r in ranked[: self.k]]

    def without(self, replica_id: bytes) -> 'ShardMap':
        return ShardMap([r for r in self.replicas if r.replica_id != replica_id], self.k)


def shard_select(shard_map: ShardMap, box_id: bytes) -> list[bytes]:
    return shard_map.select(box_id)
