"""Per-box key derivation, sealing, verification and opening.

Box layout on the wire and on disk:

    box_id(32) ‖ ciphertext_length(4, big-endian) ‖ ciphertext ‖ signature(64)

A zero ``ciphertext_length`` marks a tombstone.
"""

import logging
from dataclasses import dataclass

from mixnet_workbench.bacap.caps import MAX_INDEX, Context, ReadCap, WriteCap, advance_cap, chain_info
from mixnet_workbench.bacap.errors import (
    BoxMismatchError,
    DecryptionError,
    EncodingError,
    IndexOverflowError,
    NonInvertibleError,
    SignatureError,
    TombstoneError,
)
from mixnet_workbench.crypto_core import (
    AuthenticationError,
    GroupElement,
    GroupScalar,
    InvalidScalarError,
    KdfState,
    aead_open,
    aead_seal,
    kdf_expand,
    kdf_scalar,
    nonce_for,
    scalar_mult,
    sign_with_scalar,
    signature_nonce,
    verify_signature,
)

logger = logging.getLogger(__name__)

BOX_ID_SIZE = 32
SIGNATURE_SIZE = 64
_HEADER_SIZE = BOX_ID_SIZE + 4


@dataclass(frozen=True)
class BoxKeys:
    index: int
    box_id: GroupElement
    encryption_key: bytes
    blinding: GroupScalar
    next_state: KdfState

    def __repr__(self):
        return f'BoxKeys(index={self.index}, box_id={self.box_id!r})'


@dataclass(frozen=True)
class BacapBox:
    box_id: bytes
    ciphertext: bytes
    signature: bytes

    @property
    def is_tombstone(self) -> bool:
        return len(self.ciphertext) == 0

    def to_bytes(self) -> bytes:
        return self.box_id + len(self.ciphertext).to_bytes(4, 'big') + self.ciphertext + self.signature

    @classmethod
    def from_bytes(cls, data: bytes) -> 'BacapBox':
        if len(data) < _HEADER_SIZE + SIGNATURE_SIZE:
            raise EncodingError('box encoding is truncated')
        length = int.from_bytes(data[BOX_ID_SIZE:_HEADER_SIZE], 'big')
        if len(data) != _HEADER_SIZE + length + SIGNATURE_SIZE:
            raise EncodingError('box length field does not match the encoding')
        return cls(data[:BOX_ID_SIZE], data[_HEADER_SIZE : _HEADER_SIZE + length], data[_HEADER_SIZE + length :])


def derive_next(state: KdfState, index: int, ctx: Context, root_public: GroupElement) -> BoxKeys:
    if index >= MAX_INDEX:
        raise IndexOverflowError(f'box index {index} exhausts the 64-bit index space')
    next_state, e_i, k_i = kdf_expand(state, chain_info(index), 3)
    encryption_key = kdf_expand(KdfState(e_i), b'bacap/E' + ctx.value, 1)[0]
    blinding = kdf_scalar(KdfState(k_i), b'bacap/K' + ctx.value)
    return BoxKeys(
        index=index,
        box_id=scalar_mult(root_public, blinding),
        encryption_key=encryption_key,
        blinding=blinding,
        next_state=KdfState(next_state),
    )


class SequenceCursor:
    """Walks a box sequence forward from a capability.

    Owned by one caller at a time; it holds only the current chain state.
    """

    def __init__(self, cap: ReadCap | WriteCap, ctx: Context):
        self._root_public = cap.root_public
        self._ctx = ctx
        self._state = cap.state
        self._index = cap.index

    @property
    def index(self) -> int:
        return self._index

    def __iter__(self):
        return self

    def __next__(self) -> BoxKeys:
        keys = derive_next(self._state, self._index, self._ctx, self._root_public)
        self._state = keys.next_state
        self._index += 1
        return keys


def keys_at(cap: ReadCap | WriteCap, ctx: Context, index: int) -> BoxKeys:
    return next(SequenceCursor(advance_cap(cap, index), ctx))


def _sign(keys: BoxKeys, write_cap: WriteCap, ciphertext: bytes) -> bytes:
    secret = write_cap.root_private * keys.blinding
    return sign_with_scalar(secret, keys.box_id, ciphertext, signature_nonce(secret, ciphertext))


def seal(keys: BoxKeys, write_cap: WriteCap, message: bytes) -> BacapBox:
    box_id = keys.box_id.to_bytes()
    ciphertext = aead_seal(keys.encryption_key, nonce_for(box_id), message, box_id)
    return BacapBox(box_id, ciphertext, _sign(keys, write_cap, ciphertext))


def make_tombstone(keys: BoxKeys, write_cap: WriteCap) -> BacapBox:
    return BacapBox(keys.box_id.to_bytes(), b'', _sign(keys, write_cap, b''))


def verify(box: BacapBox) -> bool:
    return verify_signature(box.box_id, box.ciphertext, box.signature)


def open_box(keys: BoxKeys, box: BacapBox) -> bytes:
    box_id = keys.box_id.to_bytes()
    if box.box_id != box_id:
        raise BoxMismatchError('box does not carry the expected box ID')
    if not verify(box):
        raise SignatureError('box signature does not verify under its box ID')
    if box.is_tombstone:
        raise TombstoneError(f'box {keys.index} was deleted by its writer')
    try:
        return aead_open(keys.encryption_key, nonce_for(box_id), box.ciphertext, box_id)
    except AuthenticationError as e:
        raise DecryptionError(f'box {keys.index} failed to decrypt') from e


def recover_root(signing_key: GroupScalar, blinding: GroupScalar) -> GroupScalar:
    """Return the root private key from one derived signing key and its blinding factor.

    This is why derived signing keys are never handed out.
    """
    try:
        return signing_key * blinding.inverse()
    except InvalidScalarError as e:
        raise NonInvertibleError('blinding factor is not invertible') from e
