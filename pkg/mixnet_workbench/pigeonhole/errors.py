from mixnet_workbench.errors import WorkbenchError


class PigeonholeError(WorkbenchError):
    pass


class ShardingError(PigeonholeError):
    pass


class EnvelopeError(PigeonholeError):
    """Malformed envelope, or one that does not decrypt for this replica."""


class BoxRejectedError(PigeonholeError):
    """A box failed verification or conflicts with what the replica already holds."""


class TombstonePrecedenceError(BoxRejectedError):
    pass


class StoreError(PigeonholeError):
    pass


class ChannelError(PigeonholeError):
    pass
