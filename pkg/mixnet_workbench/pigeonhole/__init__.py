from .channel import NO_ACK, ChannelMessage, ChannelReader, ChannelState, SentBox
from .courier import CourierState, Decision
from .envelopes import (
    CourierEnvelope,
    EnvelopeKind,
    ReplyStatus,
    open_envelope,
    open_reply,
    reply_size,
    seal_envelope,
    seal_reply,
    write_envelope_size,
)
from .errors import (
    BoxRejectedError,
    ChannelError,
    EnvelopeError,
    PigeonholeError,
    ShardingError,
    StoreError,
    TombstonePrecedenceError,
)
from .network import FaultSchedule, LinkDrop, PigeonholeClient, PigeonholeNetwork, ReplicaOutage
from .replica import PendingRead, Replica, StoreOutcome
from .scenarios import (
    BackfillReport,
    CopyTrial,
    all_or_nothing_sweep,
    all_or_nothing_trial,
    backfill_after_retention,
    minimum_storage_time,
    retention_weeks_for,
)
from .sharding import ReplicaEntry, ShardMap, shard_select
from .store import ReplicaStore

__all__ = [
    'NO_ACK',
    'ChannelMessage',
    'ChannelReader',
    'ChannelState',
    'SentBox',
    'CourierState',
    'Decision',
    'CourierEnvelope',
    'EnvelopeKind',
    'ReplyStatus',
    'open_envelope',
    'open_reply',
    'reply_size',
    'seal_envelope',
    'seal_reply',
    'write_envelope_size',
    'BoxRejectedError',
    'ChannelError',
    'EnvelopeError',
    'PigeonholeError',
    'ShardingError',
    'StoreError',
    'TombstonePrecedenceError',
    'FaultSchedule',
    'LinkDrop',
    'PigeonholeClient',
    'PigeonholeNetwork',
    'ReplicaOutage',
    'PendingRead',
    'Replica',
    'StoreOutcome',
    'BackfillReport',
    'CopyTrial',
    'all_or_nothing_sweep',
    'all_or_nothing_trial',
    'backfill_after_retention',
    'minimum_storage_time',
    'retention_weeks_for',
    'ReplicaEntry',
    'ShardMap',
    'shard_select',
    'ReplicaStore',
]
