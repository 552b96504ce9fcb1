from abc import ABC, abstractmethod
from collections import Counter

from cryptography.hazmat.primitives.asymmetric.x448 import X448PrivateKey, X448PublicKey
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey

from mixnet_workbench.crypto_core.entropy import EntropySource, read_entropy
from mixnet_workbench.crypto_core.errors import InvalidPointError


class NikeSuite(ABC):
    """Non-interactive key exchange with a blinding operation on public keys.

    ``blind(exchange-result-compatible public key, factor)`` must commute with ``exchange`` so that a
    client can pre-compute every hop's shared secret from a single ephemeral key.
    """

    name: str
    public_key_size: int
    private_key_size: int
    shared_secret_size: int

    def generate_keypair(self, rng: EntropySource | None = None) -> tuple[bytes, bytes]:
        private_key = read_entropy(rng, self.private_key_size)
        return private_key, self.public_from_private(private_key)

    @abstractmethod
    def public_from_private(self, private_key: bytes) -> bytes: ...

    @abstractmethod
    def exchange(self, private_key: bytes, public_key: bytes) -> bytes: ...

    @abstractmethod
    def blind(self, public_key: bytes, factor: bytes) -> bytes: ...

    def __repr__(self):
        return f'{type(self).__name__}({self.name!r})'


class _MontgomeryNike(NikeSuite):
    _private_cls: type
    _public_cls: type

    def public_from_private(self, private_key: bytes) -> bytes:
        return self._private_cls.from_private_bytes(private_key).public_key().public_bytes_raw()

    def exchange(self, private_key: bytes, public_key: bytes) -> bytes:
        try:
            peer = self._public_cls.from_public_bytes(public_key)
            return self._private_cls.from_private_bytes(private_key).exchange(peer)
        except ValueError as e:
            raise InvalidPointError(f'{self.name} exchange rejected the public key') from e

    def blind(self, public_key: bytes, factor: bytes) -> bytes:
        # Ladder multiplication by the clamped factor; clamping is applied identically on every path.
        return self.exchange(factor, public_key)


class X25519Nike(_MontgomeryNike):
    name = 'x25519'
    public_key_size = 32
    private_key_size = 32
    shared_secret_size = 32
    _private_cls = X25519PrivateKey
    _public_cls = X25519PublicKey


class X448Nike(_MontgomeryNike):
    name = 'x448'
    public_key_size = 56
    private_key_size = 56
    shared_secret_size = 56
    _private_cls = X448PrivateKey
    _public_cls = X448PublicKey


class InstrumentedNike(NikeSuite):
    """Counts public-key operations performed through the wrapped suite."""

    def __init__(self, inner: NikeSuite):
        self.inner = inner
        self.name = inner.name
        self.public_key_size = inner.public_key_size
        self.private_key_size = inner.private_key_size
        self.shared_secret_size = inner.shared_secret_size
        self.operations: Counter[str] = Counter()

    def public_from_private(self, private_key: bytes) -> bytes:
        self.operations['public_from_private'] += 1
        return self.inner.public_from_private(private_key)

    def exchange(self, private_key: bytes, public_key: bytes) -> bytes:
        self.operations['exchange'] += 1
        return self.inner.exchange(private_key, public_key)

    def blind(self, public_key: bytes, factor: bytes) -> bytes:
        self.operations['blind'] += 1
        return self.inner.blind(public_key, factor)

    @property
    def public_key_operations(self) -> int:
        return self.operations['exchange'] + self.operations['blind']

    def reset(self):
        self.operations.clear()
