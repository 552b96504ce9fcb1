from .commands import NextHop, NodeDelay, Recipient, SurbReply, decode_commands, encode_commands, recipient_id
from .errors import (
    CommandError,
    GeometryError,
    MacError,
    PayloadIntegrityError,
    ReplayError,
    SphinxError,
    SurbReuseError,
    UnknownSurbError,
)
from .sizes import SphinxGeometry, geometry
from .kem_sphinx import kem_unwrap, kem_wrap
from .nike_sphinx import nike_unwrap, nike_wrap
from .packet import ForwardEvent, PathHop, PathSpec, SphinxPacket, TerminalEvent
from .replay import ReplayCache
from .surb import Surb, SurbKeyring, SurbKeySet, surb_create, surb_decrypt, surb_open, surb_reply


def wrap(geometry: SphinxGeometry, path: PathSpec, payload: bytes, **kwargs) -> SphinxPacket:
    return (nike_wrap if geometry.kind == 'nike' else kem_wrap)(geometry, path, payload, **kwargs)


def unwrap(geometry: SphinxGeometry, private_key: bytes, packet: SphinxPacket, **kwargs) -> ForwardEvent | TerminalEvent:
    return (nike_unwrap if geometry.kind == 'nike' else kem_unwrap)(geometry, private_key, packet, **kwargs)


__all__ = [
    'NextHop',
    'NodeDelay',
    'Recipient',
    'SurbReply',
    'decode_commands',
    'encode_commands',
    'recipient_id',
    'CommandError',
    'GeometryError',
    'MacError',
    'PayloadIntegrityError',
    'ReplayError',
    'SphinxError',
    'SurbReuseError',
    'UnknownSurbError',
    'SphinxGeometry',
    'geometry',
    'kem_unwrap',
    'kem_wrap',
    'nike_unwrap',
    'nike_wrap',
    'ForwardEvent',
    'PathHop',
    'PathSpec',
    'SphinxPacket',
    'TerminalEvent',
    'ReplayCache',
    'Surb',
    'SurbKeyring',
    'SurbKeySet',
    'surb_create',
    'surb_decrypt',
    'surb_open',
    'surb_reply',
    'wrap',
    'unwrap',
]
