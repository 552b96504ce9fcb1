"""AES-256-GCM-SIV sealing.

Every plaintext is framed with one content byte before encryption, so the empty message seals to a
non-empty ciphertext and tombstones never need a special case here.
"""

import hashlib

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCMSIV

from mixnet_workbench.crypto_core.errors import AuthenticationError

KEY_SIZE = 32
NONCE_SIZE = 12
TAG_SIZE = 16
_FRAME = b'\x00'
OVERHEAD = len(_FRAME) + TAG_SIZE


def nonce_for(label: bytes) -> bytes:
    """Per-object nonce: the first 12 bytes of SHA-256 over a unique label such as a box ID."""
    return hashlib.sha256(label).digest()[:NONCE_SIZE]


def aead_seal(key: bytes, nonce: bytes, plaintext: bytes, associated_data: bytes | None = None) -> bytes:
    if len(key) != KEY_SIZE:
        raise ValueError(f'AEAD key must be {KEY_SIZE} bytes')
    if len(nonce) != NONCE_SIZE:
        raise ValueError(f'AEAD nonce must be {NONCE_SIZE} bytes')
    return AESGCMSIV(key).encrypt(nonce, _FRAME + plaintext, associated_data)


def aead_open(key: bytes, nonce: bytes, ciphertext: bytes, associated_data: bytes | None = None) -> bytes:
    if len(ciphertext) < OVERHEAD:
        raise AuthenticationError('ciphertext shorter than the AEAD overhead')
    try:
        framed = AESGCMSIV(key).decrypt(nonce, ciphertext, associated_data)
    except InvalidTag as e:
        raise AuthenticationError('AEAD authentication failed') from e
    if framed[:1] != _FRAME:
        raise AuthenticationError('unexpected AEAD content frame')
    return framed[1:]
