from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


# Unknown keys in a scenario file are errors, never silently ignored
class _Strict(BaseModel):
    model_config = ConfigDict(extra='forbid')


# Node counts per layer
class TopologyConfig(_Strict):
    clients: int = Field(20, ge=0, description='Number of clients')
    gateways: int = Field(3, ge=1, description='Number of gateway nodes (g)')
    layer_width: int = Field(3, ge=1, description='Mix nodes per layer (n); there are always three layers')
    services: int = Field(4, ge=1, description='Number of service nodes (couriers) in echomix mode')  # ignored in loopix mode
    providers: int = Field(5, ge=1, description='Number of providers in loopix mode')  # each client is pinned to one


# Per-hop delay and the packet format carried on every link
class MixingConfig(_Strict):
    mu: float = Field(0.2, gt=0, description='Mean per-hop delay in seconds (1/lambda)')
    suite: str = Field('x25519', description='Sphinx suite name, fixes the wire packet size')  # checked when the run starts
    max_hops: int = Field(5, ge=1, le=16, description='Sphinx geometry hop count')
    payload_size: int = Field(2000, ge=1, description='Sphinx payload size in bytes')


# Client emission and gateway decoy rules
class TrafficConfig(_Strict):
    client_rate: float = Field(0.5, ge=0, description='Packets per second emitted by each online client')
    app_fraction: float = Field(0.0, ge=0, le=1, description='Share of emissions carrying application traffic')  # 0 means all decoys
    selector: Literal['always-app', 'alternate', 'history-dependent', 'bursty'] = Field(
        'alternate', description='Decoy/application multiplexing rule'
    )
    gateway_decoys: Literal['off', 'coupon', 'coverage'] = Field(
        'coupon', description='Gateway top-up rule: none, the coupon-collector bound, or the link-coverage rate'
    )
    coverage_target: float = Field(0.99, gt=0, lt=1, description='Link-coverage probability for gateway_decoys=coverage')
    broken_client: bool = Field(False, description='Client 0 sends every application packet to one favourite service')  # negative control


# A single client pair exchanging messages at a fixed rate
class ConversationConfig(_Strict):
    sender: int = Field(0, ge=0, description='Client index of the sender')
    receiver: int = Field(1, ge=0, description='Client index of the receiver')
    interval: float = Field(10.0, gt=0, description='Seconds between conversation messages')

    @model_validator(mode='after')
    def distinct_parties(self):
        if self.sender == self.receiver:
            raise ValueError('sender and receiver must differ')
        return self


# Loop traffic used to rate links
class HeartbeatConfig(_Strict):
    enabled: bool = Field(False)
    rate: float = Field(1.0, gt=0, description='Heartbeat loops per second emitted by each node')
    timeout: float = Field(10.0, gt=0, description='Seconds after which an unreturned loop counts as lost')
    collapse_threshold: float = Field(0.5, ge=0, le=1, description='Rating below which a link counts as collapsed')
    epoch_seconds: float = Field(60.0, gt=0, description='Rating upload period in seconds')  # independent of the PKI epoch


# One injected link fault; patterns match node names such as L1-0 or gw-2
class FaultConfig(_Strict):
    src: str = Field(..., description='fnmatch pattern of the sending node')
    dst: str = Field(..., description='fnmatch pattern of the receiving node')
    drop_probability: float = Field(1.0, ge=0, le=1)
    start: float = Field(0.0, ge=0, description='Seconds after which the fault is active')
    end: float | None = Field(None, description='Seconds after which the fault stops; open-ended when unset')
    exempt_src: str | None = Field(None, description='fnmatch pattern of a sender the fault never applies to')  # the one honest input of an n-1 attack


# Clients alternate exponential online and offline periods
class ChurnConfig(_Strict):
    enabled: bool = Field(False)
    mean_online: float = Field(600.0, gt=0, description='Mean online period in seconds')
    mean_offline: float = Field(300.0, gt=0, description='Mean offline period in seconds')


# What the global observer records
class ObserverConfig(_Strict):
    record_trace: bool = Field(True, description='Write link observations to the JSONL trace')
    coverage_window: float | None = Field(None, gt=0, description='Window for link-coverage counting; defaults to mu')
    memoryless_snapshots: int = Field(0, ge=0, description='Queue snapshots taken for the memorylessness test')  # 0 disables the test


# Root of a scenario TOML file
class ScenarioConfig(_Strict):
    name: str = Field(..., description='Scenario name, echoed in traces and summaries')
    mode: Literal['echomix', 'loopix'] = Field('echomix')
    seed: int = Field(1, description='Default seed; the --seed flag overrides it')
    duration: float = Field(600.0, gt=0, description='Simulated seconds')
    topology: TopologyConfig = Field(default_factory=TopologyConfig)
    mixing: MixingConfig = Field(default_factory=MixingConfig)
    traffic: TrafficConfig = Field(default_factory=TrafficConfig)
    conversation: ConversationConfig | None = Field(None, description='One conversing client pair, if any')
    heartbeat: HeartbeatConfig = Field(default_factory=HeartbeatConfig)
    faults: list[FaultConfig] = Field(default_factory=list)
    churn: ChurnConfig = Field(default_factory=ChurnConfig)
    observer: ObserverConfig = Field(default_factory=ObserverConfig)

    @model_validator(mode='after')
    def conversation_fits(self):
        if self.conversation is not None:
            if max(self.conversation.sender, self.conversation.receiver) >= self.topology.clients:
                raise ValueError('conversation parties must be existing client indices')
        return self
