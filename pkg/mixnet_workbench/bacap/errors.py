from mixnet_workbench.errors import WorkbenchError


class BacapError(WorkbenchError):
    pass


class IndexOverflowError(BacapError):
    pass


class CapabilityRegressionError(BacapError):
    """Raised when asked to move a capability to an index it has already passed."""


class SignatureError(BacapError):
    pass


class BoxMismatchError(BacapError):
    pass


class DecryptionError(BacapError):
    pass


class TombstoneError(BacapError):
    """The box exists but was deleted by its writer; distinct from an absent box."""


class NonInvertibleError(BacapError):
    pass


class EncodingError(BacapError):
    pass
