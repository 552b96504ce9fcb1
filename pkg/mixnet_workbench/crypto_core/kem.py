import hashlib
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass

from mixnet_workbench.crypto_core.entropy import EntropySource
from mixnet_workbench.crypto_core.errors import CryptoError
from mixnet_workbench.crypto_core.kdf import KdfState, hash256, kdf_expand
from mixnet_workbench.crypto_core.nike import NikeSuite

SHARED_SECRET_SIZE = 32


@dataclass(frozen=True)
class Encapsulation:
    ciphertext: bytes
    shared_secret: bytes


class KemSuite(ABC):
    name: str
    public_key_size: int
    private_key_size: int
    ciphertext_size: int
    shared_secret_size: int = SHARED_SECRET_SIZE

    @abstractmethod
    def generate_keypair(self, rng: EntropySource | None = None) -> tuple[bytes, bytes]:
        """Return ``(private_key, public_key)``."""

    @abstractmethod
    def encapsulate(self, public_key: bytes, rng: EntropySource | None = None) -> Encapsulation: ...

    @abstractmethod
    def decapsulate(self, private_key: bytes, ciphertext: bytes) -> bytes: ...

    def _check(self, value: bytes, size: int, what: str):
        if len(value) != size:
            raise CryptoError(f'{self.name}: {what} must be {size} bytes, got {len(value)}')

    def __repr__(self):
        return f'{type(self).__name__}({self.name!r})'


class DhKem(KemSuite):
    """Hash-DH KEM over a NIKE; the private key is stored as ``private ‖ public``."""

    def __init__(self, nike: NikeSuite, name: str | None = None):
        self.nike = nike
        self.name = name or f'{nike.name}-kem'
        self.public_key_size = nike.public_key_size
        self.private_key_size = nike.private_key_size + nike.public_key_size
        self.ciphertext_size = nike.public_key_size

    def generate_keypair(self, rng: EntropySource | None = None) -> tuple[bytes, bytes]:
        private_key, public_key = self.nike.generate_keypair(rng)
        return private_key + public_key, public_key

    def encapsulate(self, public_key: bytes, rng: EntropySource | None = None) -> Encapsulation:
        self._check(public_key, self.public_key_size, 'public key')
        ephemeral_private, ephemeral_public = self.nike.generate_keypair(rng)
        dh = self.nike.exchange(ephemeral_private, public_key)
        return Encapsulation(ephemeral_public, self._extract_and_expand(dh, ephemeral_public + public_key))

    def decapsulate(self, private_key: bytes, ciphertext: bytes) -> bytes:
        self._check(private_key, self.private_key_size, 'private key')
        self._check(ciphertext, self.ciphertext_size, 'ciphertext')
        private, public = private_key[: self.nike.private_key_size], private_key[self.nike.private_key_size :]
        dh = self.nike.exchange(private, ciphertext)
        return self._extract_and_expand(dh, ciphertext + public)

    def _extract_and_expand(self, dh: bytes, kem_context: bytes) -> bytes:
        return kdf_expand(KdfState(hash256(b'dhkem', self.name.encode(), dh)), b'shared_secret' + kem_context, 1)[0]


class PaddedKem(KemSuite):
    """Functional KEM whose key and ciphertext sizes are padded to match a larger primitive.

    Only the sizes are meaningful; security is that of the inner KEM. The padding is a deterministic
    function of the inner value and the whole padded ciphertext is bound into the shared secret.
    """

    def __init__(self, inner: KemSuite, name: str, public_key_size: int, private_key_size: int, ciphertext_size: int):
        if min(public_key_size - inner.public_key_size, private_key_size - inner.private_key_size, ciphertext_size - inner.ciphertext_size) < 0:
            raise CryptoError('padded sizes must not be smaller than the inner suite')
        self.inner = inner
        self.name = name
        self.public_key_size = public_key_size
        self.private_key_size = private_key_size
        self.ciphertext_size = ciphertext_size

    def _pad(self, label: bytes, value: bytes, size: int) -> bytes:
        return value + hashlib.shake_256(self.name.encode() + label + value).digest(size - len(value))

    def generate_keypair(self, rng: EntropySource | None = None) -> tuple[bytes, bytes]:
        private_key, public_key = self.inner.generate_keypair(rng)
        return self._pad(b'sk', private_key, self.private_key_size), self._pad(b'pk', public_key, self.public_key_size)

    def encapsulate(self, public_key: bytes, rng: EntropySource | None = None) -> Encapsulation:
        self._check(public_key, self.public_key_size, 'public key')
        inner = self.inner.encapsulate(public_key[: self.inner.public_key_size], rng)
        ciphertext = self._pad(b'ct', inner.ciphertext, self.ciphertext_size)
        return Encapsulation(ciphertext, self._bind(inner.shared_secret, ciphertext))

    def decapsulate(self, private_key: bytes, ciphertext: bytes) -> bytes:
        self._check(private_key, self.private_key_size, 'private key')
        self._check(ciphertext, self.ciphertext_size, 'ciphertext')
        secret = self.inner.decapsulate(private_key[: self.inner.private_key_size], ciphertext[: self.inner.ciphertext_size])
        return self._bind(secret, ciphertext)

    def _bind(self, secret: bytes, ciphertext: bytes) -> bytes:
        return kdf_expand(KdfState(hash256(b'padded-kem', self.name.encode(), secret, ciphertext)), b'shared_secret', 1)[0]


class CombinedKem(KemSuite):
    """Concatenation combiner: the shared secret is a KDF over every member secret and ciphertext."""

    def __init__(self, members: list[KemSuite], name: str | None = None):
        if not members:
            raise CryptoError('cannot combine an empty list of KEM suites')
        self.members = list(members)
        self.name = name or '+'.join(member.name for member in self.members)
        self.public_key_size = sum(m.public_key_size for m in self.members)
        self.private_key_size = sum(m.private_key_size for m in self.members)
        self.ciphertext_size = sum(m.ciphertext_size for m in self.members)

    @staticmethod
    def _split(data: bytes, sizes: list[int]) -> list[bytes]:
        parts, offset = [], 0
        for size in sizes:
            parts.append(data[offset : offset + size])
            offset += size
        return parts

    def generate_keypair(self, rng: EntropySource | None = None) -> tuple[bytes, bytes]:
        pairs = [member.generate_keypair(rng) for member in self.members]
        return b''.join(p[0] for p in pairs), b''.join(p[1] for p in pairs)

    def encapsulate(self, public_key: bytes, rng: EntropySource | None = None) -> Encapsulation:
        self._check(public_key, self.public_key_size, 'public key')
        keys = self._split(public_key, [m.public_key_size for m in self.members])
        results = [member.encapsulate(key, rng) for member, key in zip(self.members, keys)]
        ciphertexts = [r.ciphertext for r in results]
        return Encapsulation(b''.join(ciphertexts), self._combine([r.shared_secret for r in results], ciphertexts))

    def decapsulate(self, private_key: bytes, ciphertext: bytes) -> bytes:
        self._check(private_key, self.private_key_size, 'private key')
        self._check(ciphertext, self.ciphertext_size, 'ciphertext')
        keys = self._split(private_key, [m.private_key_size for m in self.members])
        ciphertexts = self._split(ciphertext, [m.ciphertext_size for m in self.members])
        secrets = [member.decapsulate(key, ct) for member, key, ct in zip(self.members, keys, ciphertexts)]
        return self._combine(secrets, ciphertexts)

    def _combine(self, secrets: list[bytes], ciphertexts: list[bytes]) -> bytes:
        ikm = hash256(b'kem-combiner', self.name.encode(), *secrets, *ciphertexts)
        return kdf_expand(KdfState(ikm), b'shared_secret', 1)[0]


def kem_combine(suites: list[KemSuite], name: str | None = None) -> KemSuite:
    return CombinedKem(suites, name)


class InstrumentedKem(KemSuite):
    def __init__(self, inner: KemSuite):
        self.inner = inner
        self.name = inner.name
        self.public_key_size = inner.public_key_size
        self.private_key_size = inner.private_key_size
        self.ciphertext_size = inner.ciphertext_size
        self.shared_secret_size = inner.shared_secret_size
        self.operations: Counter[str] = Counter()

    def generate_keypair(self, rng: EntropySource | None = None) -> tuple[bytes, bytes]:
        self.operations['generate_keypair'] += 1
        return self.inner.generate_keypair(rng)

    def encapsulate(self, public_key: bytes, rng: EntropySource | None = None) -> Encapsulation:
        self.operations['encapsulate'] += 1
        return self.inner.encapsulate(public_key, rng)

    def decapsulate(self, private_key: bytes, ciphertext: bytes) -> bytes:
        self.operations['decapsulate'] += 1
        return self.inner.decapsulate(private_key, ciphertext)

    @property
    def public_key_operations(self) -> int:
        return self.operations['encapsulate'] + self.operations['decapsulate']

    def reset(self):
        self.operations.clear()
