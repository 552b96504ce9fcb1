from typing import Literal

from pydantic import BaseModel, Field


# One row of the geometry table, sizes in bytes
class GeometryRow(BaseModel):
    suite: str = Field(..., description='Registered suite name')
    kind: Literal['nike', 'kem']
    max_hops: int = Field(..., description='Hops the header can route through')
    round_trip_hops: int = Field(..., description='Hops of the echo round trip served by this geometry')
    payload_size: int = Field(..., description='Application payload in bytes')
    alpha_bytes: int
    beta_bytes: int
    gamma_bytes: int
    header_bytes: int
    surb_bytes: int
    overhead_bytes: int = Field(..., description='Header plus payload tag, flags and SURB slot in bytes')
    packet_bytes: int


# Per-client traffic at a fixed packet rate
class BandwidthReport(BaseModel):
    suite: str
    rate_pkt_per_s: float = Field(..., description='Packets per second sent by one client')
    packet_bytes: int
    payload_bytes: int
    bytes_per_s: float
    bytes_per_day: float
    gigabytes_per_day: float = Field(..., description='Per-day volume in 10^9 bytes')
    payload_efficiency: float = Field(..., description='Payload share of each packet')


# What a global observer sees on the final mix hop
class LastHopReport(BaseModel):
    mode: Literal['echomix', 'loopix']
    counts: dict[str, int] = Field(..., description='Packets per destination on the last mix hop')
    z_scores: dict[str, float]
    target: str | None = Field(None, description='Destination scored as the suspected receiver')
    target_z: float
    max_abs_z: float
    detected: bool = Field(..., description='Whether the observer singles out a destination')


class LinkRatingReport(BaseModel):
    epoch: int
    ratings: dict[str, float] = Field(..., description='Link "src->dst" to returned/sent heartbeat ratio')
    collapsed: list[str] = Field(default_factory=list, description='Links rated below the collapse threshold')


# Written as <scenario>-<seed>.summary.json by the simulate command
class SimulationSummary(BaseModel):
    scenario: str
    mode: Literal['echomix', 'loopix']
    seed: int
    duration_s: float
    packet_bytes: int
    emitted: int
    delivered: int
    dropped: int
    in_flight: int  # emitted = delivered + dropped + in_flight
    drop_causes: dict[str, int] = Field(default_factory=dict)
    link_observations: int
    round_trips: int = Field(0, description='Completed client echo round trips')
    mean_rtt_s: float | None = Field(None, description='Mean client round-trip time in seconds')
    analytic_rtt_s: float | None = Field(None, description='Erlang mean of the same trip')
    emission_uniformity_p: float | None = Field(None, description='Chi-square p-value of all client destinations')
    worst_client_uniformity_p: float | None = Field(None, description='Smallest per-client chi-square p-value')
    link_coverage: float | None = Field(None, description='Share of mu-windows with every L1->L2 link active')
    memorylessness_p: float | None = None  # None unless observer.memoryless_snapshots > 0
    last_hop: LastHopReport | None = None
    link_ratings: list[LinkRatingReport] = Field(default_factory=list)


class SuiteVerdict(BaseModel):
    suite: str
    passed: bool
    detail: str = Field('', description='Measured values behind the verdict')
    seconds: float = Field(0.0, description='Wall-clock time spent in the suite')


# Aggregate of one selftest run; passed only when every verdict passed
class SelftestReport(BaseModel):
    seed: int
    passed: bool
    verdicts: list[SuiteVerdict]
