class WorkbenchError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(WorkbenchError):
    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f'{field}: {message}' if field else message)


class InvariantViolation(WorkbenchError):
    pass
