from mixnet_workbench.errors import WorkbenchError


class SphinxError(WorkbenchError):
    pass


class GeometryError(SphinxError):
    pass


class MacError(SphinxError):
    pass


class ReplayError(SphinxError):
    pass


class PayloadIntegrityError(SphinxError):
    """The payload tag did not verify: the packet was modified in transit."""


class CommandError(SphinxError):
    pass


class SurbReuseError(SphinxError):
    pass


class UnknownSurbError(SphinxError):
    pass
