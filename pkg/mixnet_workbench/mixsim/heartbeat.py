"""Loop heartbeats, link fault injection and per-link health ratings.

Nodes send loop packets over their own routes; a loop that fails to come back counts against every
link it was meant to cross. Ratings therefore index links, and a single bad link stands out because it
is the only one whose loops all fail.
"""

import fnmatch
import logging
from dataclasses import dataclass, field

from mixnet_workbench.dto.reports import LinkRatingReport
from mixnet_workbench.dto.scenario import FaultConfig
from mixnet_workbench.mixsim.rng import Draws
from mixnet_workbench.mixsim.topology import Topology
from mixnet_workbench.pki import PkiView

logger = logging.getLogger(__name__)

Link = tuple[str, str]


@dataclass(frozen=True)
class LinkFault:
    src: str
    dst: str
    drop_probability: float = 1.0
    start: float = 0.0
    end: float | None = None
    exempt_src: str | None = None

    @classmethod
    def from_config(cls, config: FaultConfig) -> 'LinkFault':
        return cls(**config.model_dump())

    def applies(self, src: str, dst: str, now: float) -> bool:
        if now < self.start or (self.end is not None and now >= self.end):
            return False
        if self.exempt_src is not None and fnmatch.fnmatchcase(src, self.exempt_src):
            return False
        return fnmatch.fnmatchcase(src, self.src) and fnmatch.fnmatchcase(dst, self.dst)


class FaultSet:
    def __init__(self, faults: list[LinkFault], draws: Draws):
        self.faults = faults
        self.draws = draws

    def drops(self, src: str, dst: str, now: float) -> bool:
        for fault in self.faults:
            if fault.applies(src, dst, now):
                if fault.drop_probability >= 1.0 or self.draws.uniform() < fault.drop_probability:
                    return True
        return False


def heartbeat_route(topology: Topology, origin: str, pick) -> list[str]:
    """Loop route for ``origin``; ``pick(nodes)`` chooses one node uniformly.

    Gateways and services traverse the full cycle through all three layers. A mix at layer k goes out
    to the service layer and returns through fresh choices down to itself.
    """
    layers = topology.layers
    role = topology.role(origin)
    match role:
        case 'gateway':
            out = [pick(layer) for layer in layers]
            back = [pick(layer) for layer in reversed(layers)]
            return [origin, *out, pick(topology.service_nodes), *back, origin]
        case 'service':
            down = [pick(layer) for layer in reversed(layers)]
            up = [pick(layer) for layer in layers]
            return [origin, *down, pick(topology.gateway_nodes), *up, origin]
        case 'L1' | 'L2' | 'L3':
            k = int(role[1])
            out = [pick(layer) for layer in layers[k:]]
            back = [pick(layer) for layer in reversed(layers[k:])]
            return [origin, *out, pick(topology.service_nodes), *back, origin]
    raise ValueError(f'{origin} does not send heartbeats')


def route_links(route: list[str]) -> list[Link]:
    return list(zip(route, route[1:]))


@dataclass
class _Loop:
    sent_at: float
    links: list[Link]
    returned: bool = False


@dataclass
class LinkHealth:
    """Returned-versus-sent loop counters, evaluated once a loop's timeout has passed."""

    timeout: float = 10.0
    collapse_threshold: float = 0.5
    _loops: dict[int, _Loop] = field(default_factory=dict)
    _sent: dict[Link, int] = field(default_factory=dict)
    _returned: dict[Link, int] = field(default_factory=dict)
    reports: list[LinkRatingReport] = field(default_factory=list)

    def sent(self, loop_id: int, now: float, route: list[str]):
        self._loops[loop_id] = _Loop(now, route_links(route))

    def returned(self, loop_id: int):
        loop = self._loops.get(loop_id)
        if loop is not None:
            loop.returned = True

    def _evaluate(self, now: float):
        due = [loop_id for loop_id, loop in self._loops.items() if loop.sent_at <= now - self.timeout]
        for loop_id in due:
            loop = self._loops.pop(loop_id)
            for link in loop.links:
                self._sent[link] = self._sent.get(link, 0) + 1
                if loop.returned:
                    self._returned[link] = self._returned.get(link, 0) + 1

    def close_epoch(self, epoch: int, now: float, pki: PkiView | None = None) -> LinkRatingReport:
        self._evaluate(now)
        ratings = {link: self._returned.get(link, 0) / sent for link, sent in self._sent.items() if sent}
        self._sent.clear()
        self._returned.clear()
        if pki is not None:
            pki.upload_ratings(epoch, ratings)
        collapsed = sorted(f'{a}->{b}' for (a, b), r in ratings.items() if r < self.collapse_threshold)
        report = LinkRatingReport(
            epoch=epoch,
            ratings={f'{a}->{b}': r for (a, b), r in sorted(ratings.items())},
            collapsed=collapsed,
        )
        if collapsed:
            logger.warning(f'Epoch {epoch}: {len(collapsed)} link(s) collapsed: {", ".join(collapsed)}')
        else:
            logger.info(f'Epoch {epoch}: {len(ratings)} links rated, none collapsed')
        self.reports.append(report)
        return report
