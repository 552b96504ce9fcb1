import secrets
from typing import Protocol

from mixnet_workbench.crypto_core.errors import EntropyError


class EntropySource(Protocol):
    """Anything exposing ``randbytes``; ``random.Random`` and ``secrets.SystemRandom`` both qualify."""

    def randbytes(self, n: int) -> bytes: ...


def system_entropy() -> EntropySource:
    return secrets.SystemRandom()


def read_entropy(rng: EntropySource | None, n: int) -> bytes:
    source = rng if rng is not None else system_entropy()
    try:
        data = source.randbytes(n)
    except Exception as e:
        raise EntropyError(f'entropy source failed to produce {n} bytes') from e
    if len(data) != n:
        raise EntropyError(f'entropy source returned {len(data)} bytes, wanted {n}')
    return data
