"""Traffic coupling: merging decoy and application destinations into one emission stream.

If both input streams are individually uniform over services, any selection rule that picks between
them (even one that looks at the history of emitted destinations) keeps the merged stream uniform.
"""

from collections import deque
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from mixnet_workbench.crypto_core import hash256
from mixnet_workbench.mixsim.errors import CouplingContractError


@dataclass(frozen=True)
class AppRequest:
    destination: int
    pseudorandom: bool = True


Selector = Callable[[Sequence[int], int], bool]


def always_app(history: Sequence[int], pending: int) -> bool:
    return True


def alternate(history: Sequence[int], pending: int) -> bool:
    return len(history) % 2 == 0


def history_dependent(history: Sequence[int], pending: int) -> bool:
    """Send application traffic right after an even destination, decoys otherwise."""
    return bool(history) and history[-1] % 2 == 0


def bursty(history: Sequence[int], pending: int) -> bool:
    return (len(history) // 10) % 2 == 0 or pending > 32


SELECTORS: dict[str, Selector] = {
    'always-app': always_app,
    'alternate': alternate,
    'history-dependent': history_dependent,
    'bursty': bursty,
}


def destination_for_box(box_id: bytes, services: int) -> int:
    return int.from_bytes(hash256(b'service-for-box', box_id)[:8], 'big') % services


def uniform_decoys(rng: np.random.Generator, services: int) -> Iterator[int]:
    while True:
        yield from (int(x) for x in rng.integers(0, services, size=1024))


def coupling_mux(
    decoys: Iterator[int],
    app_queue: deque[AppRequest],
    selector: Selector,
    history: list[int],
    strict: bool = True,
) -> int:
    """Pick the next emission's destination and append it to ``history``."""
    if app_queue and selector(history, len(app_queue)):
        request = app_queue.popleft()
        if strict and not request.pseudorandom:
            raise CouplingContractError(f'application request to service {request.destination} has no pseudorandom cover')
        destination = request.destination
    else:
        destination = next(decoys)
    history.append(destination)
    return destination


def merged_stream(
    emissions: int,
    decoys: Iterator[int],
    app_source: Iterator[AppRequest],
    app_fraction: float,
    selector: Selector,
    rng: np.random.Generator,
    strict: bool = True,
) -> list[int]:
    """Run ``emissions`` mux steps while application requests arrive at ``app_fraction`` per emission."""
    queue: deque[AppRequest] = deque()
    history: list[int] = []
    arrivals = rng.random(emissions) < app_fraction
    for arrived in arrivals:
        if arrived:
            queue.append(next(app_source))
        coupling_mux(decoys, queue, selector, history, strict)
    return history
