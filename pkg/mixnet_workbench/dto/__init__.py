from .reports import (
    BandwidthReport,
    GeometryRow,
    LastHopReport,
    LinkRatingReport,
    SelftestReport,
    SimulationSummary,
    SuiteVerdict,
)
from .scenario import (
    ChurnConfig,
    ConversationConfig,
    FaultConfig,
    HeartbeatConfig,
    MixingConfig,
    ObserverConfig,
    ScenarioConfig,
    TopologyConfig,
    TrafficConfig,
)

__all__ = [
    'BandwidthReport',
    'GeometryRow',
    'LastHopReport',
    'LinkRatingReport',
    'SelftestReport',
    'SimulationSummary',
    'SuiteVerdict',
    'ChurnConfig',
    'ConversationConfig',
    'FaultConfig',
    'HeartbeatConfig',
    'MixingConfig',
    'ObserverConfig',
    'ScenarioConfig',
    'TopologyConfig',
    'TrafficConfig',
]
