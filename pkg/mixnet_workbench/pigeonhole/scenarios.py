"""Scripted end-to-end runs over a simulated storage network."""

import logging
import math
from dataclasses import dataclass, field

from mixnet_workbench.bacap import generate_write_cap, keys_at
from mixnet_workbench.errors import ConfigError
from mixnet_workbench.mixsim.rng import Draws, RandomStreams
from mixnet_workbench.pigeonhole.channel import ChannelReader, ChannelState
from mixnet_workbench.pigeonhole.network import FaultSchedule, PigeonholeNetwork
from mixnet_workbench.pki import SECONDS_PER_WEEK

logger = logging.getLogger(__name__)

SETTLE_SECONDS = 300.0


def retention_weeks_for(capacity_bytes: int, max_write_throughput: float) -> int:
    """How many week buckets a replica can hold when writes arrive at most at ``max_write_throughput`` B/s."""
    if capacity_bytes <= 0 or max_write_throughput <= 0:
        raise ConfigError('capacity and write throughput must be positive')
    return math.floor(capacity_bytes / (max_write_throughput * SECONDS_PER_WEEK))


def minimum_storage_time(capacity_bytes: int, max_write_throughput: float) -> float:
    """Seconds a box is guaranteed to survive.

    A box written at the very end of week w lives in bucket w, which is dropped on entering week
    ``w + retention``; it is therefore kept for at least ``retention − 1`` full weeks.
    """
    return max(0, retention_weeks_for(capacity_bytes, max_write_throughput) - 1) * SECONDS_PER_WEEK


def _bodies(count: int) -> list[bytes]:
    return [f'message {i}'.encode() for i in range(count)]


@dataclass
class BackfillReport:
    written: int = 0
    lost_after_retention: bool = False
    copy_acked: bool = False
    recovered: list[bytes] = field(default_factory=list)
    temp_tombstoned: bool = False
    items_copied: int = 0
    expected: list[bytes] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            self.written == len(self.expected)
            and self.lost_after_retention
            and self.copy_acked
            and self.recovered == self.expected
            and self.temp_tombstoned
        )


def backfill_after_retention(
    seed: int = 1, messages: int = 10, stale_reader: bool = False, **network_options
) -> BackfillReport:
    """Writer sends, the replicas garbage-collect the week, then a copy command restores the history.

    The reader was offline for longer than the retention window. The writer re-seals the same messages
    under the current week's context, stages them in a temporary channel and asks a courier to execute
    it; the reader then reads everything from the start index. With ``stale_reader`` the reader keeps the
    context of the week it went offline and finds nothing.
    """
    network = PigeonholeNetwork(seed=seed, **network_options)
    writer = network.client('writer')
    reader_client = network.client('reader')
    channel = ChannelState(
        generate_write_cap(writer.entropy), network.wsrv_context(), network.settings.box_payload_size
    )
    start = channel.write_cap.index
    bodies = _bodies(messages)
    report = BackfillReport(expected=bodies)

    def script():
        original_ids = [keys_at(channel.write_cap, channel.ctx, start + i).box_id.to_bytes() for i in range(messages)]
        for body in bodies:
            if (yield from writer.write(channel, body)):
                report.written += 1
        yield network.env.timeout(SETTLE_SECONDS)

        yield network.env.timeout(network.retention_weeks * SECONDS_PER_WEEK)
        report.lost_after_retention = all(
            all(box is None for box in network.stored(box_id)) for box_id in original_ids
        )
        logger.info(f'History gone from every replica: {report.lost_after_retention}')

        stale_ctx = channel.ctx
        ctx = network.wsrv_context()
        channel.rotate(ctx, from_index=start)
        temp, temp_boxes = writer.prepare_copy(channel, bodies)
        for box in temp_boxes:
            yield from writer.write_box(box)
        report.copy_acked = yield from writer.copy(temp, temp.write_cap.index, len(temp_boxes))
        yield network.env.timeout(SETTLE_SECONDS)

        reader = ChannelReader(channel.write_cap.read_cap(), stale_ctx if stale_reader else ctx)
        for _ in bodies:
            message = yield from reader_client.read(reader)
            if message is None:
                break
            report.recovered.append(message.body)

        temp_ids = [
            keys_at(temp.write_cap, temp.ctx, i).box_id.to_bytes()
            for i in range(temp.write_cap.index, temp.write_cap.index + len(temp_boxes))
        ]
        report.temp_tombstoned = all(
            all(box is not None and box.is_tombstone for box in network.stored(box_id)) for box_id in temp_ids
        )
        report.items_copied = sum(c.state.items_copied for c in network.couriers.values())

    network.run(network.spawn(script()))
    logger.info(f'Backfill recovered {len(report.recovered)}/{messages} messages')
    return report


@dataclass(frozen=True)
class CopyTrial:
    seed: int
    items: int
    acked: bool
    visible: int
    outages: int
    drops: int

    @property
    def all_or_nothing(self) -> bool:
        if self.acked:
            return self.visible == self.items
        return self.visible in (0, self.items)


def all_or_nothing_trial(seed: int, items: int = 5, horizon: float = 300.0, **network_options) -> CopyTrial:
    """One copy command under a randomized fault schedule; counts destination boxes visible after quiescence."""
    draws = Draws(RandomStreams(seed).generator('fault-schedule'))
    replicas = network_options.pop('replicas', 6)
    couriers = network_options.pop('couriers', 3)
    faults = FaultSchedule.randomized(
        draws, [f'replica-{i}' for i in range(replicas)], [f'courier-{i}' for i in range(couriers)], horizon
    )
    network = PigeonholeNetwork(replicas=replicas, couriers=couriers, seed=seed, faults=faults, **network_options)
    writer = network.client('writer')
    destination = ChannelState(
        generate_write_cap(writer.entropy), network.wsrv_context(), network.settings.box_payload_size
    )
    outcome = {'acked': False}
    destination_ids: list[bytes] = []

    def script():
        temp, temp_boxes = writer.prepare_copy(destination, _bodies(items))
        destination_ids.extend(sent.box.box_id for sent in destination.unacked.values())
        for box in temp_boxes:
            yield from writer.write_box(box)
        outcome['acked'] = yield from writer.copy(temp, temp.write_cap.index, items)
        quiet = max(faults.quiet_after, network.env.now)
        yield network.env.timeout(quiet - network.env.now + SETTLE_SECONDS)

    network.run(network.spawn(script()))
    visible = sum(any(box is not None for box in network.stored(box_id)) for box_id in destination_ids)
    trial = CopyTrial(seed, items, outcome['acked'], visible, len(faults.outages), len(faults.drops))
    if not trial.all_or_nothing:
        logger.warning(f'Copy under seed {seed} left {visible}/{items} writes visible (acked={trial.acked})')
    return trial


def all_or_nothing_sweep(trials: int = 100, seed: int = 1, items: int = 5) -> list[CopyTrial]:
    return [all_or_nothing_trial(seed * 1_000_003 + t, items) for t in range(trials)]
