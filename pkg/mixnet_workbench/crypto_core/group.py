"""Ed25519 prime-order group arithmetic.

Scalars are plain integers reduced modulo the group order and kept in little-endian 32-byte form on the
wire. Point arithmetic goes through libsodium's no-clamp bindings so that blinded keys compose exactly:
``B·(a×b) == (B·a)·b``.
"""

import hashlib
from dataclasses import dataclass

from nacl import bindings
from nacl.exceptions import CryptoError as NaclCryptoError

from mixnet_workbench.crypto_core.entropy import EntropySource, read_entropy
from mixnet_workbench.crypto_core.errors import InvalidPointError, InvalidScalarError

GROUP_ORDER = 2**252 + 27742317777372353535851937790883648493
SCALAR_SIZE = 32
ELEMENT_SIZE = 32
SIGNATURE_SIZE = 64

_IDENTITY_ENCODING = b'\x01' + b'\x00' * 31
_BASE_ENCODING = bytes.fromhex('58' + '66' * 31)


@dataclass(frozen=True, order=True)
class GroupScalar:
    value: int

    def __post_init__(self):
        if not 0 <= self.value < GROUP_ORDER:
            raise InvalidScalarError('scalar is not reduced modulo the group order')

    @classmethod
    def from_bytes(cls, data: bytes) -> 'GroupScalar':
        if len(data) != SCALAR_SIZE:
            raise InvalidScalarError(f'scalar encoding must be {SCALAR_SIZE} bytes, got {len(data)}')
        return cls(int.from_bytes(data, 'little'))

    @classmethod
    def reduce(cls, data: bytes) -> 'GroupScalar':
        """Reduce an arbitrary-length little-endian byte string modulo the group order."""
        return cls(int.from_bytes(data, 'little') % GROUP_ORDER)

    @classmethod
    def random(cls, rng: EntropySource | None = None) -> 'GroupScalar':
        while True:
            scalar = cls.reduce(read_entropy(rng, 64))
            if scalar.value:
                return scalar

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(SCALAR_SIZE, 'little')

    def __mul__(self, other: 'GroupScalar') -> 'GroupScalar':
        return GroupScalar(self.value * other.value % GROUP_ORDER)

    def __add__(self, other: 'GroupScalar') -> 'GroupScalar':
        return GroupScalar((self.value + other.value) % GROUP_ORDER)

    def inverse(self) -> 'GroupScalar':
        if self.value == 0:
            raise InvalidScalarError('zero has no inverse modulo the group order')
        return GroupScalar(pow(self.value, -1, GROUP_ORDER))

    def __repr__(self):
        return 'GroupScalar(<redacted>)'


@dataclass(frozen=True)
class GroupElement:
    encoded: bytes

    @classmethod
    def from_bytes(cls, data: bytes) -> 'GroupElement':
        if len(data) != ELEMENT_SIZE:
            raise InvalidPointError(f'point encoding must be {ELEMENT_SIZE} bytes, got {len(data)}')
        if not bindings.crypto_core_ed25519_is_valid_point(data):
            raise InvalidPointError('point is non-canonical, of small order or outside the prime-order subgroup')
        return cls(data)

    @classmethod
    def identity(cls) -> 'GroupElement':
        return cls(_IDENTITY_ENCODING)

    @classmethod
    def base(cls) -> 'GroupElement':
        return cls(_BASE_ENCODING)

    @property
    def is_identity(self) -> bool:
        return self.encoded == _IDENTITY_ENCODING

    def to_bytes(self) -> bytes:
        return self.encoded

    def __mul__(self, scalar: GroupScalar) -> 'GroupElement':
        return scalar_mult(self, scalar)

    def __repr__(self):
        return f'GroupElement({self.encoded.hex()[:16]}…)'


def scalar_mult(element: GroupElement, scalar: GroupScalar) -> GroupElement:
    """Return ``element·scalar``.

    A zero scalar yields the identity element. Callers treat it as an error sentinel because it is
    never a usable key.
    """
    if scalar.value == 0 or element.is_identity:
        return GroupElement.identity()
    try:
        if element.encoded == _BASE_ENCODING:
            out = bindings.crypto_scalarmult_ed25519_base_noclamp(scalar.to_bytes())
        else:
            out = bindings.crypto_scalarmult_ed25519_noclamp(scalar.to_bytes(), element.encoded)
    except NaclCryptoError as e:
        raise InvalidPointError('scalar multiplication rejected the point') from e
    return GroupElement(out)


def base_mult(scalar: GroupScalar) -> GroupElement:
    return scalar_mult(GroupElement.base(), scalar)


def sign_with_scalar(secret: GroupScalar, public: GroupElement, message: bytes, nonce: GroupScalar) -> bytes:
    """Ed25519 signature made directly with a raw scalar.

    The usual seed-hashing step is skipped, so blinded scalars sign as themselves. Callers supply the
    nonce; ``kdf.signature_nonce`` derives it deterministically from the secret and the message.
    """
    r = nonce
    if r.value == 0:
        raise InvalidScalarError('derived signature nonce is zero')
    big_r = base_mult(r).encoded
    challenge = GroupScalar.reduce(hashlib.sha512(big_r + public.encoded + message).digest())
    s = challenge * secret + r
    return big_r + s.to_bytes()


def verify_signature(public: GroupElement | bytes, message: bytes, signature: bytes) -> bool:
    key = public.encoded if isinstance(public, GroupElement) else public
    if len(key) != ELEMENT_SIZE or len(signature) != SIGNATURE_SIZE:
        return False
    try:
        bindings.crypto_sign_open(signature + message, key)
    except (NaclCryptoError, ValueError, TypeError):
        return False
    return True
