from mixnet_workbench.errors import WorkbenchError


class CryptoError(WorkbenchError):
    pass


class InvalidPointError(CryptoError):
    pass


class InvalidScalarError(CryptoError):
    pass


class AuthenticationError(CryptoError):
    """Raised when an AEAD open or a MAC check fails."""


class UnknownSuiteError(CryptoError, KeyError):
    pass


class EntropyError(CryptoError):
    pass
