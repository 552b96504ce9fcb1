import logging
import threading

logger = logging.getLogger(__name__)


class ReplayCache:
    """Per-node replay tags, partitioned by epoch.

    ``check_and_insert`` is atomic so concurrent unwrap workers can share one cache.
    """

    def __init__(self, retained_epochs: int = 2):
        self._lock = threading.Lock()
        self._seen: dict[int, set[bytes]] = {}
        self.retained_epochs = retained_epochs

    def check_and_insert(self, tag: bytes, epoch: int = 0) -> bool:
        """Return True when the tag is new, False when it is a replay."""
        with self._lock:
            seen = self._seen.setdefault(epoch, set())
            if tag in seen:
                return False
            seen.add(tag)
            return True

    def prune(self, current_epoch: int):
        with self._lock:
            for epoch in [e for e in self._seen if e <= current_epoch - self.retained_epochs]:
                dropped = self._seen.pop(epoch)
                logger.info(f'Dropped {len(dropped)} replay tags of epoch {epoch}')

    def __len__(self):
        with self._lock:
            return sum(len(tags) for tags in self._seen.values())
