"""Replica persistence: week buckets of boxes plus a table of staged entries.

On disk each week is an append log ``bucket-<week>.log``:

    magic "PHLOG" ‖ version(1) ‖ records…
    record = type(1) ‖ length(4, big-endian) ‖ payload

Record types: 1 box and 2 tombstone (payload: serialized box), 3 staged (payload: staging id(32) ‖
serialized envelope or box) and 4 discard (payload: staging id). Replaying a log in order rebuilds the
bucket. Staged entries live in the log of the week they were created in.
"""

import copy
import logging
import re
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

from mixnet_workbench.bacap import BacapBox, EncodingError
from mixnet_workbench.pigeonhole.errors import StoreError

logger = logging.getLogger(__name__)

MAGIC = b'PHLOG'
VERSION = 1
STAGING_ID_SIZE = 32
_HEADER = MAGIC + bytes([VERSION])
_BUCKET_NAME = re.compile(r'^bucket-(\d+)\.log$')


class RecordType(IntEnum):
    BOX = 1
    TOMBSTONE = 2
    STAGED = 3
    DISCARD = 4


@dataclass
class StoreSnapshot:
    buckets: dict[int, dict[bytes, BacapBox]]
    staged: dict[bytes, tuple[int, bytes]]


@dataclass
class ReplicaStore:
    directory: Path | None = None
    retention_weeks: int = 2
    buckets: dict[int, dict[bytes, BacapBox]] = field(default_factory=dict)
    staged: dict[bytes, tuple[int, bytes]] = field(default_factory=dict)

    def __post_init__(self):
        if self.retention_weeks < 1:
            raise StoreError('retention must be at least one week')
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)

    # Boxes

    @property
    def current_week(self) -> int:
        return max(self.buckets) if self.buckets else 0

    def get(self, box_id: bytes) -> BacapBox | None:
        for week in sorted(self.buckets, reverse=True):
            box = self.buckets[week].get(box_id)
            if box is not None:
                return box
        return None

    def put(self, box: BacapBox, week: int | None = None):
        week = self.current_week if week is None else week
        self.buckets.setdefault(week, {})[box.box_id] = box
        for older in self.buckets:
            if older != week:
                self.buckets[older].pop(box.box_id, None)
        record = RecordType.TOMBSTONE if box.is_tombstone else RecordType.BOX
        self._append(week, record, box.to_bytes())

    def box_count(self) -> int:
        return sum(len(b) for b in self.buckets.values())

    # Staging

    def stage(self, staging_id: bytes, payload: bytes):
        if len(staging_id) != STAGING_ID_SIZE:
            raise StoreError(f'staging id must be {STAGING_ID_SIZE} bytes')
        week = self.current_week
        self.staged[staging_id] = (week, payload)
        self._append(week, RecordType.STAGED, staging_id + payload)

    def unstage(self, staging_id: bytes) -> bytes | None:
        entry = self.staged.pop(staging_id, None)
        if entry is None:
            return None
        self._append(self.current_week, RecordType.DISCARD, staging_id)
        return entry[1]

    # Weeks

    def open_week(self, week: int) -> list[int]:
        """Start a new bucket and drop buckets older than the retention window; returns dropped weeks."""
        self.buckets.setdefault(week, {})
        if self.directory is not None and not self._path(week).exists():
            self._path(week).write_bytes(_HEADER)
        dropped = [w for w in self.buckets if w <= week - self.retention_weeks]
        for w in dropped:
            del self.buckets[w]
            if self.directory is not None:
                self._path(w).unlink(missing_ok=True)
        if dropped:
            logger.info(f'Dropped week buckets {dropped} on entering week {week}')
        return dropped

    # Snapshots

    def snapshot(self) -> StoreSnapshot:
        return StoreSnapshot(copy.deepcopy(self.buckets), dict(self.staged))

    def restore(self, snapshot: StoreSnapshot):
        self.buckets = copy.deepcopy(snapshot.buckets)
        self.staged = dict(snapshot.staged)

    # Logs

    def _path(self, week: int) -> Path:
        return self.directory / f'bucket-{week}.log'

    def _append(self, week: int, record: RecordType, payload: bytes):
        if self.directory is None:
            return
        path = self._path(week)
        try:
            with path.open('ab') as log:
                if log.tell() == 0:
                    log.write(_HEADER)
                log.write(bytes([record]) + len(payload).to_bytes(4, 'big') + payload)
        except OSError as e:
            raise StoreError(f'cannot append to {path}: {e.strerror}') from e

    @classmethod
    def load(cls, directory: Path, retention_weeks: int = 2) -> 'ReplicaStore':
        """Rebuild a store by replaying every bucket log in ``directory``."""
        store = cls(None, retention_weeks)
        weeks = sorted(
            int(m.group(1)) for p in directory.iterdir() if (m := _BUCKET_NAME.match(p.name)) is not None
        )
        for week in weeks:
            store.buckets.setdefault(week, {})
            _replay(directory / f'bucket-{week}.log', week, store)
        store.directory = directory
        return store


def _replay(path: Path, week: int, store: ReplicaStore):
    data = path.read_bytes()
    if data[: len(MAGIC)] != MAGIC:
        raise StoreError(f'{path.name} is not a bucket log')
    if data[len(MAGIC)] != VERSION:
        raise StoreError(f'{path.name} has unsupported version {data[len(MAGIC)]}')
    offset = len(_HEADER)
    while offset < len(data):
        if offset + 5 > len(data):
            logger.warning(f'Truncated record at the end of {path.name} ignored')
            break
        kind, length = data[offset], int.from_bytes(data[offset + 1 : offset + 5], 'big')
        payload = data[offset + 5 : offset + 5 + length]
        if len(payload) != length:
            logger.warning(f'Truncated record at the end of {path.name} ignored')
            break
        offset += 5 + length
        try:
            match RecordType(kind):
                case RecordType.BOX | RecordType.TOMBSTONE:
                    box = BacapBox.from_bytes(payload)
                    for other in store.buckets.values():
                        other.pop(box.box_id, None)
                    store.buckets[week][box.box_id] = box
                case RecordType.STAGED:
                    store.staged[payload[:STAGING_ID_SIZE]] = (week, payload[STAGING_ID_SIZE:])
                case RecordType.DISCARD:
                    store.staged.pop(payload, None)
        except (ValueError, EncodingError) as e:
            raise StoreError(f'corrupt record in {path.name}') from e
