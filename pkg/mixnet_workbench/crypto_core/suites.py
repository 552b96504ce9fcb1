"""Named suites used by the geometry calculator, the CLI and the tests."""

from typing import Callable

from mixnet_workbench.crypto_core.errors import UnknownSuiteError
from mixnet_workbench.crypto_core.kem import DhKem, KemSuite, PaddedKem, kem_combine
from mixnet_workbench.crypto_core.nike import NikeSuite, X448Nike, X25519Nike

# ML-KEM-768 sizes (FIPS 203).
MLKEM768_PUBLIC_KEY_SIZE = 1184
MLKEM768_PRIVATE_KEY_SIZE = 2400
MLKEM768_CIPHERTEXT_SIZE = 1088


def mlkem768_stub() -> KemSuite:
    return PaddedKem(
        DhKem(X25519Nike()),
        name='mlkem768-stub',
        public_key_size=MLKEM768_PUBLIC_KEY_SIZE,
        private_key_size=MLKEM768_PRIVATE_KEY_SIZE,
        ciphertext_size=MLKEM768_CIPHERTEXT_SIZE,
    )


_REGISTRY: dict[str, Callable[[], NikeSuite | KemSuite]] = {
    'x25519': X25519Nike,
    'x448': X448Nike,
    'x25519-kem': lambda: DhKem(X25519Nike()),
    'x448-kem': lambda: DhKem(X448Nike()),
    'mlkem768-stub': mlkem768_stub,
    'mlkem768-x25519': lambda: kem_combine([mlkem768_stub(), DhKem(X25519Nike())], name='mlkem768-x25519'),
    'mlkem768-x448': lambda: kem_combine([mlkem768_stub(), DhKem(X448Nike())], name='mlkem768-x448'),
}


def suite_names() -> list[str]:
    return list(_REGISTRY)


def get_suite(name: str) -> NikeSuite | KemSuite:
    try:
        factory = _REGISTRY[name]
    except KeyError as e:
        raise UnknownSuiteError(f'unknown suite {name!r}; known suites: {", ".join(_REGISTRY)}') from e
    return factory()


def get_nike(name: str) -> NikeSuite:
    suite = get_suite(name)
    if not isinstance(suite, NikeSuite):
        raise UnknownSuiteError(f'{name!r} is not a NIKE suite')
    return suite


def get_kem(name: str) -> KemSuite:
    suite = get_suite(name)
    if not isinstance(suite, KemSuite):
        raise UnknownSuiteError(f'{name!r} is not a KEM suite')
    return suite
