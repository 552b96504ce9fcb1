from .coupling import SELECTORS, AppRequest, coupling_mux, destination_for_box, merged_stream, uniform_decoys
from .errors import ConfigError, CouplingContractError, InvariantViolation, SimulationError
from .heartbeat import LinkFault, LinkHealth, heartbeat_route
from .latency import (
    CouponBound,
    CoverageRate,
    ErlangLatency,
    coupon_bound,
    coupon_collector_draws,
    coverage_rate,
    harmonic,
    rtt_distribution,
    sample_hop_delay,
)
from .observer import LinkLog, MemorylessnessTracker, PacketLedger, gpa_last_hop_test, link_coverage
from .rng import Draws, RandomStreams
from .scenario import bundled_scenarios, load_scenario, parse_scenario
from .simulator import Simulation, SimulationResult, run
from .topology import Topology
from .trace import TRACE_SCHEMA, TRACE_VERSION, read_trace_header, write_trace

__all__ = [
    'SELECTORS',
    'AppRequest',
    'coupling_mux',
    'destination_for_box',
    'merged_stream',
    'uniform_decoys',
    'ConfigError',
    'CouplingContractError',
    'InvariantViolation',
    'SimulationError',
    'LinkFault',
    'LinkHealth',
    'heartbeat_route',
    'CouponBound',
    'CoverageRate',
    'ErlangLatency',
    'coupon_bound',
    'coupon_collector_draws',
    'coverage_rate',
    'harmonic',
    'rtt_distribution',
    'sample_hop_delay',
    'LinkLog',
    'MemorylessnessTracker',
    'PacketLedger',
    'gpa_last_hop_test',
    'link_coverage',
    'Draws',
    'RandomStreams',
    'bundled_scenarios',
    'load_scenario',
    'parse_scenario',
    'Simulation',
    'SimulationResult',
    'run',
    'Topology',
    'TRACE_SCHEMA',
    'TRACE_VERSION',
    'read_trace_header',
    'write_trace',
]
