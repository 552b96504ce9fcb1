"""Reliable channels over BACAP box sequences.

A channel message is framed as ``ack_index(8) ‖ body_length(4) ‖ body ‖ zero padding`` so every box of
a channel has the same size. ``ack_index`` opportunistically acknowledges the peer's channel; the value
2^64−1 means "no acknowledgement". Acknowledgements ride only on user-initiated sends.
"""

import logging
from dataclasses import dataclass, field

from mixnet_workbench.bacap import (
    BacapBox,
    BoxKeys,
    Context,
    ReadCap,
    SequenceCursor,
    WriteCap,
    advance_cap,
    keys_at,
    make_tombstone,
    open_box,
    seal,
)
from mixnet_workbench.pigeonhole.errors import ChannelError

logger = logging.getLogger(__name__)

NO_ACK = 2**64 - 1
MESSAGE_HEADER_SIZE = 8 + 4


@dataclass(frozen=True)
class ChannelMessage:
    body: bytes
    ack_index: int | None = None

    def encode(self, payload_size: int) -> bytes:
        if len(self.body) > payload_size - MESSAGE_HEADER_SIZE:
            raise ChannelError(f'message of {len(self.body)} bytes exceeds the {payload_size}-byte box payload')
        ack = NO_ACK if self.ack_index is None else self.ack_index
        framed = ack.to_bytes(8, 'big') + len(self.body).to_bytes(4, 'big') + self.body
        return framed.ljust(payload_size, b'\x00')

    @classmethod
    def decode(cls, data: bytes) -> 'ChannelMessage':
        if len(data) < MESSAGE_HEADER_SIZE:
            raise ChannelError('channel message is truncated')
        ack = int.from_bytes(data[:8], 'big')
        length = int.from_bytes(data[8:12], 'big')
        if MESSAGE_HEADER_SIZE + length > len(data):
            raise ChannelError('channel message length exceeds the box payload')
        return cls(data[12 : 12 + length], None if ack == NO_ACK else ack)


@dataclass
class SentBox:
    keys: BoxKeys
    box: BacapBox


@dataclass
class ChannelState:
    """Writer side: the write capability, the acknowledgement mark and the unacknowledged window."""

    write_cap: WriteCap
    ctx: Context
    payload_size: int
    last_acked: int | None = None
    unacked: dict[int, SentBox] = field(default_factory=dict)
    outgoing_ack: int | None = None
    _cursor: SequenceCursor | None = field(default=None, repr=False)

    def __post_init__(self):
        self._cursor = SequenceCursor(self.write_cap, self.ctx)

    @property
    def next_index(self) -> int:
        return self._cursor.index

    def rotate(self, ctx: Context, from_index: int | None = None):
        """Switch to a new blinding context; indices restart at ``from_index`` (default: the capability's)."""
        self.ctx = ctx
        cap = self.write_cap
        if from_index is not None and from_index != cap.index:
            cap = advance_cap(cap, from_index)
        self._cursor = SequenceCursor(cap, ctx)

    def send(self, body: bytes) -> SentBox:
        """Seal the next box; carries the pending acknowledgement for the peer, if any."""
        message = ChannelMessage(body, self.outgoing_ack)
        self.outgoing_ack = None
        keys = next(self._cursor)
        sent = SentBox(keys, seal(keys, self.write_cap, message.encode(self.payload_size)))
        self.unacked[keys.index] = sent
        return sent

    def tombstone(self, index: int) -> BacapBox:
        return make_tombstone(keys_at(self.write_cap, self.ctx, index), self.write_cap)

    def acknowledge(self, index: int):
        """Mark everything up to ``index`` delivered. Acknowledgements never move backwards."""
        if self.last_acked is not None and index <= self.last_acked:
            logger.debug(f'Ignoring stale acknowledgement {index} (already at {self.last_acked})')
            return
        self.last_acked = index
        for i in [i for i in self.unacked if i <= index]:
            del self.unacked[i]

    def note_received(self, peer_index: int):
        if self.outgoing_ack is None or peer_index > self.outgoing_ack:
            self.outgoing_ack = peer_index


class ChannelReader:
    def __init__(self, read_cap: ReadCap | WriteCap, ctx: Context):
        self._cap = read_cap
        self._cursor = SequenceCursor(read_cap, ctx)
        self._current = next(self._cursor)

    @property
    def index(self) -> int:
        return self._current.index

    @property
    def box_id(self) -> bytes:
        return self._current.box_id.to_bytes()

    @property
    def keys(self) -> BoxKeys:
        return self._current

    def rotate(self, ctx: Context, from_index: int):
        self._cursor = SequenceCursor(advance_cap(self._cap, from_index), ctx)
        self._current = next(self._cursor)

    def accept(self, box: BacapBox) -> ChannelMessage:
        """Open the box expected next and advance past it."""
        message = ChannelMessage.decode(open_box(self._current, box))
        self._current = next(self._cursor)
        return message
