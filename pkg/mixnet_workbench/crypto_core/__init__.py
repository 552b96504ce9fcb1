from .aead import aead_open, aead_seal, nonce_for
from .entropy import EntropySource, read_entropy, system_entropy
from .errors import AuthenticationError, CryptoError, EntropyError, InvalidPointError, InvalidScalarError, UnknownSuiteError
from .group import GROUP_ORDER, GroupElement, GroupScalar, base_mult, scalar_mult, sign_with_scalar, verify_signature
from .kdf import KdfState, hash256, kdf_expand, kdf_scalar, mac, mac_equal, signature_nonce, stream, xor_bytes
from .kem import CombinedKem, DhKem, Encapsulation, InstrumentedKem, KemSuite, PaddedKem, kem_combine
from .nike import InstrumentedNike, NikeSuite, X448Nike, X25519Nike
from .sprp import KEY_MATERIAL_SIZE, WideBlockCipher
from .suites import get_kem, get_nike, get_suite, suite_names

__all__ = [
    'aead_open',
    'aead_seal',
    'nonce_for',
    'EntropySource',
    'read_entropy',
    'system_entropy',
    'AuthenticationError',
    'CryptoError',
    'EntropyError',
    'InvalidPointError',
    'InvalidScalarError',
    'UnknownSuiteError',
    'GROUP_ORDER',
    'GroupElement',
    'GroupScalar',
    'base_mult',
    'scalar_mult',
    'sign_with_scalar',
    'verify_signature',
    'KdfState',
    'hash256',
    'kdf_expand',
    'kdf_scalar',
    'mac',
    'mac_equal',
    'signature_nonce',
    'stream',
    'xor_bytes',
    'CombinedKem',
    'DhKem',
    'Encapsulation',
    'InstrumentedKem',
    'KemSuite',
    'PaddedKem',
    'kem_combine',
    'InstrumentedNike',
    'NikeSuite',
    'X448Nike',
    'X25519Nike',
    'KEY_MATERIAL_SIZE',
    'WideBlockCipher',
    'get_kem',
    'get_nike',
    'get_suite',
    'suite_names',
]
