"""Closed-form Sphinx packet geometry.

Header = α ‖ β ‖ γ where β starts with a two byte cleartext prefix (version, reserved) followed by
``max_hops`` routing slots. A slot holds routing commands; in the KEM variant it is prefixed by the next
hop's KEM ciphertext. The payload δ is ``tag ‖ flags ‖ surb slot ‖ user payload`` so forward packets and
SURB replies have the same length.

With the defaults below and ``max_hops=5`` an X25519 NIKE header is 476 bytes and the header plus SURB
overhead is 1082 bytes.
"""

from dataclasses import dataclass
from typing import Literal

from mixnet_workbench.crypto_core import KEY_MATERIAL_SIZE, KemSuite, NikeSuite, get_suite
from mixnet_workbench.sphinx.errors import GeometryError

PREFIX_SIZE = 2
MAC_SIZE = 32
NODE_ID_SIZE = 32
RECIPIENT_ID_SIZE = 64
SURB_ID_SIZE = 16
DELAY_SIZE = 4
COMMAND_ID_SIZE = 1
PAYLOAD_TAG_SIZE = 32
PAYLOAD_FLAGS_SIZE = 2

NEXT_HOP_COMMAND_SIZE = COMMAND_ID_SIZE + NODE_ID_SIZE + MAC_SIZE
DELAY_COMMAND_SIZE = COMMAND_ID_SIZE + DELAY_SIZE
RECIPIENT_COMMAND_SIZE = COMMAND_ID_SIZE + RECIPIENT_ID_SIZE
SURB_REPLY_COMMAND_SIZE = COMMAND_ID_SIZE + SURB_ID_SIZE
ROUTING_COMMANDS_SIZE = max(
    NEXT_HOP_COMMAND_SIZE + DELAY_COMMAND_SIZE,
    RECIPIENT_COMMAND_SIZE + SURB_REPLY_COMMAND_SIZE,
)


@dataclass(frozen=True)
class SphinxGeometry:
    suite_name: str
    kind: Literal['nike', 'kem']
    element_size: int
    max_hops: int
    payload_size: int

    @property
    def kem_ciphertext_size(self) -> int:
        return self.element_size if self.kind == 'kem' else 0

    @property
    def commands_size(self) -> int:
        return ROUTING_COMMANDS_SIZE

    @property
    def slot_size(self) -> int:
        return self.kem_ciphertext_size + ROUTING_COMMANDS_SIZE

    @property
    def routing_info_size(self) -> int:
        return self.max_hops * self.slot_size

    @property
    def alpha_size(self) -> int:
        return self.element_size

    @property
    def beta_size(self) -> int:
        return PREFIX_SIZE + self.routing_info_size

    @property
    def gamma_size(self) -> int:
        return MAC_SIZE

    @property
    def header_size(self) -> int:
        return self.alpha_size + self.beta_size + self.gamma_size

    @property
    def surb_size(self) -> int:
        return self.header_size + NODE_ID_SIZE + KEY_MATERIAL_SIZE

    @property
    def delta_size(self) -> int:
        return PAYLOAD_TAG_SIZE + PAYLOAD_FLAGS_SIZE + self.surb_size + self.payload_size

    @property
    def packet_size(self) -> int:
        return self.header_size + self.delta_size

    @property
    def overhead_size(self) -> int:
        """Header plus SURB-carrying payload framing: everything that is not user payload."""
        return self.packet_size - self.payload_size

    @property
    def round_trip_hops(self) -> int:
        return 2 * self.max_hops - 1

    @property
    def payload_efficiency(self) -> float:
        return self.payload_size / self.packet_size


def geometry(suite: NikeSuite | KemSuite | str, max_hops: int, payload_size: int) -> SphinxGeometry:
    if max_hops < 1:
        raise GeometryError('max_hops must be at least 1')
    if payload_size < 0:
        raise GeometryError('payload_size must not be negative')
    if isinstance(suite, str):
        suite = get_suite(suite)
    if isinstance(suite, NikeSuite):
        return SphinxGeometry(suite.name, 'nike', suite.public_key_size, max_hops, payload_size)
    if isinstance(suite, KemSuite):
        return SphinxGeometry(suite.name, 'kem', suite.ciphertext_size, max_hops, payload_size)
    raise GeometryError(f'unsupported suite {suite!r}')
