"""Routing commands carried in each β slot.

Each command is a one byte id followed by a fixed-size body; a zero byte ends the list and the rest of
the slot is zero padding.
"""

from dataclasses import dataclass
from enum import IntEnum

from mixnet_workbench.sphinx.errors import CommandError
from mixnet_workbench.sphinx.sizes import MAC_SIZE, NODE_ID_SIZE, RECIPIENT_ID_SIZE, SURB_ID_SIZE


class CommandId(IntEnum):
    NULL = 0
    NEXT_HOP = 1
    NODE_DELAY = 2
    RECIPIENT = 3
    SURB_REPLY = 4


@dataclass(frozen=True)
class NextHop:
    node_id: bytes
    mac: bytes

    def encode(self) -> bytes:
        return bytes([CommandId.NEXT_HOP]) + self.node_id + self.mac


@dataclass(frozen=True)
class NodeDelay:
    delay_ms: int

    def encode(self) -> bytes:
        return bytes([CommandId.NODE_DELAY]) + self.delay_ms.to_bytes(4, 'big')


@dataclass(frozen=True)
class Recipient:
    recipient_id: bytes

    def encode(self) -> bytes:
        return bytes([CommandId.RECIPIENT]) + self.recipient_id


@dataclass(frozen=True)
class SurbReply:
    surb_id: bytes

    def encode(self) -> bytes:
        return bytes([CommandId.SURB_REPLY]) + self.surb_id


RoutingCommand = NextHop | NodeDelay | Recipient | SurbReply

_BODY_SIZES = {
    CommandId.NEXT_HOP: NODE_ID_SIZE + MAC_SIZE,
    CommandId.NODE_DELAY: 4,
    CommandId.RECIPIENT: RECIPIENT_ID_SIZE,
    CommandId.SURB_REPLY: SURB_ID_SIZE,
}


def recipient_id(name: str | bytes) -> bytes:
    raw = name.encode() if isinstance(name, str) else name
    if len(raw) > RECIPIENT_ID_SIZE:
        raise CommandError(f'recipient id longer than {RECIPIENT_ID_SIZE} bytes')
    return raw.ljust(RECIPIENT_ID_SIZE, b'\x00')


def encode_commands(commands: list[RoutingCommand], size: int) -> bytes:
    encoded = b''.join(command.encode() for command in commands)
    if len(encoded) > size:
        raise CommandError(f'routing commands need {len(encoded)} bytes but the slot holds {size}')
    return encoded.ljust(size, b'\x00')


def decode_commands(data: bytes) -> list[RoutingCommand]:
    commands: list[RoutingCommand] = []
    offset = 0
    while offset < len(data) and data[offset] != CommandId.NULL:
        try:
            command_id = CommandId(data[offset])
        except ValueError as e:
            raise CommandError(f'unknown routing command {data[offset]}') from e
        body = data[offset + 1 : offset + 1 + _BODY_SIZES[command_id]]
        if len(body) != _BODY_SIZES[command_id]:
            raise CommandError('truncated routing command')
        offset += 1 + len(body)
        match command_id:
            case CommandId.NEXT_HOP:
                commands.append(NextHop(body[:NODE_ID_SIZE], body[NODE_ID_SIZE:]))
            case CommandId.NODE_DELAY:
                commands.append(NodeDelay(int.from_bytes(body, 'big')))
            case CommandId.RECIPIENT:
                commands.append(Recipient(body))
            case CommandId.SURB_REPLY:
                commands.append(SurbReply(body))
    return commands
