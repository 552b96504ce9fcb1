from mixnet_workbench.errors import ConfigError, InvariantViolation, WorkbenchError


class SimulationError(WorkbenchError):
    pass


class CouplingContractError(SimulationError):
    """An application request tried to pick its destination without pseudorandom cover."""


__all__ = ['SimulationError', 'CouplingContractError', 'ConfigError', 'InvariantViolation']
