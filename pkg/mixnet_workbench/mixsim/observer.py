"""The global passive observer: link records, packet accounting and the analyses run over them."""

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from mixnet_workbench.dto.reports import LastHopReport
from mixnet_workbench.mixsim.errors import InvariantViolation
from mixnet_workbench.mixsim.topology import Topology
from mixnet_workbench.stats import UniformityResult, combined_chi_square, poisson_z_scores

logger = logging.getLogger(__name__)

LOOPIX_DETECTION_Z = 4.0
ECHOMIX_UNIFORM_Z = 3.0


class LinkLog:
    """Column store of link observations: time, sender, receiver, wire size. No payload bytes."""

    def __init__(self):
        self.times: list[float] = []
        self.sources: list[str] = []
        self.destinations: list[str] = []
        self.sizes: list[int] = []

    def record(self, time: float, src: str, dst: str, size: int):
        self.times.append(time)
        self.sources.append(src)
        self.destinations.append(dst)
        self.sizes.append(size)

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self):
        return zip(self.times, self.sources, self.destinations, self.sizes)

    def wire_sizes(self) -> set[int]:
        return set(self.sizes)

    def link_counts(self) -> Counter:
        return Counter(zip(self.sources, self.destinations))

    def link_times(self, links: set[tuple[str, str]]) -> dict[tuple[str, str], np.ndarray]:
        collected: dict[tuple[str, str], list[float]] = defaultdict(list)
        for t, src, dst in zip(self.times, self.sources, self.destinations):
            if (src, dst) in links:
                collected[(src, dst)].append(t)
        return {link: np.asarray(collected.get(link, []), dtype=float) for link in links}


@dataclass
class PacketLedger:
    """Every emitted packet ends exactly once as delivered or dropped, or is still in flight."""

    emitted: dict[int, str] = field(default_factory=dict)
    delivered: set[int] = field(default_factory=set)
    dropped: dict[int, str] = field(default_factory=dict)

    def emit(self, pid: int, kind: str):
        if pid in self.emitted:
            raise InvariantViolation(f'packet {pid} emitted twice')
        self.emitted[pid] = kind

    def _settle(self, pid: int):
        if pid not in self.emitted:
            raise InvariantViolation(f'packet {pid} settled without being emitted')
        if pid in self.delivered or pid in self.dropped:
            raise InvariantViolation(f'packet {pid} settled twice')

    def deliver(self, pid: int):
        self._settle(pid)
        self.delivered.add(pid)

    def drop(self, pid: int, cause: str):
        self._settle(pid)
        self.dropped[pid] = cause

    @property
    def in_flight(self) -> int:
        return len(self.emitted) - len(self.delivered) - len(self.dropped)

    def drop_causes(self) -> dict[str, int]:
        return dict(Counter(self.dropped.values()))

    def check(self):
        if self.in_flight < 0:
            raise InvariantViolation('more packets settled than emitted')


def check_wire_uniformity(log: LinkLog, expected_size: int):
    sizes = log.wire_sizes()
    if sizes and sizes != {expected_size}:
        raise InvariantViolation(f'link observations carry sizes {sorted(sizes)}, expected only {expected_size}')


def last_hop_counts(log: LinkLog, topology: Topology) -> dict[str, int]:
    """Packets seen on the final mix layer's links into each destination."""
    counts = {node: 0 for node in topology.destinations}
    last_layer = set(topology.layers[-1])
    for src, dst in zip(log.sources, log.destinations):
        if src in last_layer and dst in counts:
            counts[dst] += 1
    return counts


def gpa_last_hop_test(mode: str, log: LinkLog, topology: Topology, target: str | None = None) -> LastHopReport:
    """Excess last-hop traffic per destination, scored against the uniform share.

    ``target`` is the destination the observer suspects (the receiver's provider in loopix mode).
    Without a target, the highest-scoring destination is reported.
    """
    counts = last_hop_counts(log, topology)
    z_scores = poisson_z_scores(counts)
    if target is None and z_scores:
        target = max(z_scores, key=z_scores.get)
    target_z = float(z_scores.get(target, 0.0)) if target else 0.0
    max_abs_z = max((abs(z) for z in z_scores.values()), default=0.0)
    if mode == 'loopix':
        detected = target_z > LOOPIX_DETECTION_Z
    else:
        detected = max_abs_z >= ECHOMIX_UNIFORM_Z
    logger.info(f'Last-hop test ({mode}): target={target} z={target_z:.2f} max|z|={max_abs_z:.2f}')
    return LastHopReport(
        mode=mode,
        counts=counts,
        z_scores={k: float(v) for k, v in z_scores.items()},
        target=target,
        target_z=target_z,
        max_abs_z=float(max_abs_z),
        detected=detected,
    )


def link_coverage(
    log: LinkLog,
    links: list[tuple[str, str]],
    window: float,
    start: float,
    end: float,
) -> float:
    """Fraction of ``window``-long intervals in [start, end) in which every link carried a packet."""
    windows = int((end - start) // window)
    if windows <= 0 or not links:
        return 0.0
    covered = np.ones(windows, dtype=bool)
    for times in log.link_times(set(links)).values():
        active = np.zeros(windows, dtype=bool)
        idx = np.floor((times[(times >= start) & (times < start + windows * window)] - start) / window).astype(int)
        active[idx] = True
        covered &= active
    return float(covered.mean())


class MemorylessnessTracker:
    """Which queued packet leaves next, by arrival rank, for snapshots grouped by queue size."""

    def __init__(self, max_queue: int = 8):
        self.max_queue = max_queue
        self.groups: dict[int, np.ndarray] = {}

    def record(self, queue_size: int, rank: int):
        if not 2 <= queue_size <= self.max_queue:
            return
        counts = self.groups.setdefault(queue_size, np.zeros(queue_size, dtype=np.int64))
        counts[rank] += 1

    @property
    def snapshots(self) -> int:
        return int(sum(c.sum() for c in self.groups.values()))

    def result(self) -> UniformityResult | None:
        usable = {q: counts for q, counts in self.groups.items() if counts.sum() >= 5 * q}
        if not usable:
            return None
        return combined_chi_square(usable)
