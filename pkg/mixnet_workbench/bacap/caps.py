"""Write and read capabilities.

Binary layouts (all integers big-endian):

    ReadCap   root_public(32) ‖ state(32) ‖ index(8)                    72 bytes
    WriteCap  root_private(32, little-endian scalar) ‖ root_public(32)
              ‖ state(32) ‖ index(8)                                    104 bytes
"""

from dataclasses import dataclass, replace
from typing import TypeVar

from mixnet_workbench.crypto_core import (
    CryptoError,
    EntropySource,
    GroupElement,
    GroupScalar,
    KdfState,
    base_mult,
    hash256,
    kdf_expand,
    read_entropy,
)
from mixnet_workbench.bacap.errors import CapabilityRegressionError, EncodingError

MAX_INITIAL_INDEX = 2**63
MAX_INDEX = 2**64 - 1
READ_CAP_SIZE = 72
WRITE_CAP_SIZE = 104


def chain_info(index: int) -> bytes:
    return b'bacap/chain' + index.to_bytes(8, 'big')


@dataclass(frozen=True)
class Context:
    value: bytes

    def __post_init__(self):
        if len(self.value) != 32:
            raise ValueError('context must be a 256-bit hash')

    @classmethod
    def from_public_value(cls, public_value: bytes) -> 'Context':
        return cls(hash256(b'bacap/context', public_value))


@dataclass(frozen=True)
class ReadCap:
    root_public: GroupElement
    state: KdfState
    index: int

    def to_bytes(self) -> bytes:
        return self.root_public.to_bytes() + self.state.state + self.index.to_bytes(8, 'big')

    @classmethod
    def from_bytes(cls, data: bytes) -> 'ReadCap':
        if len(data) != READ_CAP_SIZE:
            raise EncodingError(f'read capability must be {READ_CAP_SIZE} bytes')
        try:
            root_public = GroupElement.from_bytes(data[:32])
        except CryptoError as e:
            raise EncodingError('read capability carries an invalid root public key') from e
        return cls(root_public, KdfState(data[32:64]), int.from_bytes(data[64:72], 'big'))


@dataclass(frozen=True)
class WriteCap:
    root_private: GroupScalar
    root_public: GroupElement
    index: int
    state: KdfState

    def to_bytes(self) -> bytes:
        return self.root_private.to_bytes() + self.root_public.to_bytes() + self.state.state + self.index.to_bytes(8, 'big')

    @classmethod
    def from_bytes(cls, data: bytes) -> 'WriteCap':
        if len(data) != WRITE_CAP_SIZE:
            raise EncodingError(f'write capability must be {WRITE_CAP_SIZE} bytes')
        try:
            root_private = GroupScalar.from_bytes(data[:32])
            root_public = GroupElement.from_bytes(data[32:64])
        except CryptoError as e:
            raise EncodingError('write capability carries invalid key material') from e
        if base_mult(root_private) != root_public:
            raise EncodingError('write capability root keys do not match')
        return cls(root_private, root_public, int.from_bytes(data[96:104], 'big'), KdfState(data[64:96]))

    def read_cap(self) -> ReadCap:
        return ReadCap(self.root_public, self.state, self.index)


def generate_write_cap(rng: EntropySource | None = None) -> WriteCap:
    root_private = GroupScalar.random(rng)
    initial_index = int.from_bytes(read_entropy(rng, 8), 'big') >> 1
    return WriteCap(
        root_private=root_private,
        root_public=base_mult(root_private),
        index=initial_index,
        state=KdfState.random(rng),
    )


def read_cap_from(write_cap: WriteCap) -> ReadCap:
    return write_cap.read_cap()


Cap = TypeVar('Cap', ReadCap, WriteCap)


def advance_cap(cap: Cap, to_index: int) -> Cap:
    """Move a capability forward; the intermediate KDF states are not kept anywhere."""
    if to_index < cap.index:
        raise CapabilityRegressionError(f'cannot move capability from index {cap.index} back to {to_index}')
    if to_index > MAX_INDEX:
        raise CapabilityRegressionError('target index exceeds the 64-bit index space')
    state = cap.state
    for index in range(cap.index, to_index):
        state = KdfState(kdf_expand(state, chain_info(index), 3)[0])
    return replace(cap, state=state, index=to_index)


def rekey(cap: Cap, rng: EntropySource | None = None) -> Cap:
    """Mix fresh entropy into the chain state for post-compromise security.

    The result must be shared with the reader again out of band.
    """
    fresh = read_entropy(rng, 32)
    state = KdfState(kdf_expand(KdfState(hash256(cap.state.state, fresh)), b'bacap/rekey', 1)[0])
    return replace(cap, state=state)
