from .boxes import (
    BacapBox,
    BoxKeys,
    SequenceCursor,
    derive_next,
    keys_at,
    make_tombstone,
    open_box,
    recover_root,
    seal,
    verify,
)
from .caps import (
    Context,
    ReadCap,
    WriteCap,
    advance_cap,
    generate_write_cap,
    read_cap_from,
    rekey,
)
from .errors import (
    BacapError,
    BoxMismatchError,
    CapabilityRegressionError,
    DecryptionError,
    EncodingError,
    IndexOverflowError,
    NonInvertibleError,
    SignatureError,
    TombstoneError,
)

__all__ = [
    'BacapBox',
    'BoxKeys',
    'SequenceCursor',
    'derive_next',
    'keys_at',
    'make_tombstone',
    'open_box',
    'recover_root',
    'seal',
    'verify',
    'Context',
    'ReadCap',
    'WriteCap',
    'advance_cap',
    'generate_write_cap',
    'read_cap_from',
    'rekey',
    'BacapError',
    'BoxMismatchError',
    'CapabilityRegressionError',
    'DecryptionError',
    'EncodingError',
    'IndexOverflowError',
    'NonInvertibleError',
    'SignatureError',
    'TombstoneError',
]
