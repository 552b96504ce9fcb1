"""Symmetric primitives shared by every protocol layer.

The KDF is HKDF-SHA256 (RFC 5869): extract with a fixed domain salt over the 256-bit state, then expand
with the caller's ``info`` label. The MAC is HMAC-SHA256 and the stream cipher is ChaCha20 under an all-zero
nonce; every stream key is single-use.
"""

import hashlib
import hmac
from dataclasses import dataclass
from itertools import count

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from mixnet_workbench.crypto_core.entropy import EntropySource, read_entropy
from mixnet_workbench.crypto_core.group import GroupScalar

STATE_SIZE = 32
MAC_SIZE = 32
_KDF_SALT = b'mixnet-workbench/kdf/v1'
_MAX_OUTPUTS = 255
_STREAM_NONCE = b'\x00' * 16


@dataclass(frozen=True)
class KdfState:
    state: bytes

    def __post_init__(self):
        if len(self.state) != STATE_SIZE:
            raise ValueError(f'KDF state must be {STATE_SIZE} bytes')

    @classmethod
    def random(cls, rng: EntropySource | None = None) -> 'KdfState':
        return cls(read_entropy(rng, STATE_SIZE))

    def __repr__(self):
        return 'KdfState(<redacted>)'


def kdf_expand(state: KdfState, info: bytes, n_outputs: int) -> list[bytes]:
    if not 1 <= n_outputs <= _MAX_OUTPUTS:
        raise ValueError(f'n_outputs must be within 1..{_MAX_OUTPUTS}')
    okm = HKDF(
        algorithm=hashes.SHA256(),
        length=STATE_SIZE * n_outputs,
        salt=_KDF_SALT,
        info=info,
    ).derive(state.state)
    return [okm[i * STATE_SIZE : (i + 1) * STATE_SIZE] for i in range(n_outputs)]


def kdf_scalar(state: KdfState, info: bytes) -> GroupScalar:
    """Derive a nonzero scalar; 512 bits are reduced so the bias is negligible, zero is resampled."""
    for attempt in count():
        wide = b''.join(kdf_expand(state, info + attempt.to_bytes(4, 'big'), 2))
        scalar = GroupScalar.reduce(wide)
        if scalar.value:
            return scalar
    raise AssertionError('unreachable')


def signature_nonce(secret: GroupScalar, message: bytes) -> GroupScalar:
    """r = KDF(secret encoding ∥ message); the same secret never signs two messages with one nonce."""
    return kdf_scalar(KdfState(hash256(secret.to_bytes(), message)), b'signature-nonce')


def hash256(*parts: bytes) -> bytes:
    h = hashlib.sha256()
    for part in parts:
        h.update(len(part).to_bytes(4, 'big'))
        h.update(part)
    return h.digest()


def mac(key: bytes, data: bytes) -> bytes:
    return hmac.digest(key, data, 'sha256')


def mac_equal(a: bytes, b: bytes) -> bool:
    return hmac.compare_digest(a, b)


def stream(key: bytes, length: int) -> bytes:
    if length == 0:
        return b''
    encryptor = Cipher(algorithms.ChaCha20(key, _STREAM_NONCE), mode=None).encryptor()
    return encryptor.update(b'\x00' * length)


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError('xor operands differ in length')
    return (int.from_bytes(a, 'big') ^ int.from_bytes(b, 'big')).to_bytes(len(a), 'big')
