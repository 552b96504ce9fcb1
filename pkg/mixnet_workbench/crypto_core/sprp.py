"""Wide-block SPRP for Sphinx payloads.

Four unbalanced Feistel rounds over ``L (32 bytes) ‖ R``: two keyed ChaCha20 rounds over R and two
HMAC-SHA256 rounds over L. Any change to any input bit scrambles the whole output block, which is what
lets the terminal hop detect a tagged payload.
"""

from dataclasses import dataclass, field

from mixnet_workbench.crypto_core.kdf import KdfState, hash256, kdf_expand, mac, stream, xor_bytes

KEY_MATERIAL_SIZE = 64
_HALF = 32


@dataclass(frozen=True)
class WideBlockCipher:
    key_material: bytes = field(repr=False)
    _round_keys: tuple[bytes, bytes, bytes, bytes] = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.key_material) != KEY_MATERIAL_SIZE:
            raise ValueError(f'SPRP key material must be {KEY_MATERIAL_SIZE} bytes')
        keys = kdf_expand(KdfState(hash256(b'sprp', self.key_material)), b'sprp-round-keys', 4)
        object.__setattr__(self, '_round_keys', tuple(keys))

    def encrypt(self, block: bytes) -> bytes:
        left, right = self._split(block)
        k1, k2, k3, k4 = self._round_keys
        right = xor_bytes(right, stream(xor_bytes(left, k1), len(right)))
        left = xor_bytes(left, mac(k2, right))
        right = xor_bytes(right, stream(xor_bytes(left, k3), len(right)))
        left = xor_bytes(left, mac(k4, right))
        return left + right

    def decrypt(self, block: bytes) -> bytes:
        left, right = self._split(block)
        k1, k2, k3, k4 = self._round_keys
        left = xor_bytes(left, mac(k4, right))
        right = xor_bytes(right, stream(xor_bytes(left, k3), len(right)))
        left = xor_bytes(left, mac(k2, right))
        right = xor_bytes(right, stream(xor_bytes(left, k1), len(right)))
        return left + right

    @staticmethod
    def _split(block: bytes) -> tuple[bytes, bytes]:
        if len(block) <= _HALF:
            raise ValueError(f'SPRP block must exceed {_HALF} bytes')
        return block[:_HALF], block[_HALF:]
