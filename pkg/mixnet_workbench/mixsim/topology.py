"""Node naming, layer assignment and the legal link table for both network modes."""

from dataclasses import dataclass
from functools import cached_property

from mixnet_workbench.dto.scenario import TopologyConfig
from mixnet_workbench.mixsim.errors import ConfigError, InvariantViolation

MIX_LAYERS = 3

ECHOMIX_LINKS = {
    ('client', 'gateway'),
    ('gateway', 'L1'),
    ('L1', 'L2'),
    ('L2', 'L3'),
    ('L3', 'service'),
    ('service', 'L3'),
    ('L3', 'L2'),
    ('L2', 'L1'),
    ('L1', 'gateway'),
    ('gateway', 'client'),
}

LOOPIX_LINKS = {
    ('client', 'provider'),
    ('provider', 'L1'),
    ('L1', 'L2'),
    ('L2', 'L3'),
    ('L3', 'provider'),
    ('provider', 'client'),
}


def client_name(i: int) -> str:
    return f'client-{i}'


def mix_name(layer: int, i: int) -> str:
    return f'L{layer}-{i}'


@dataclass(frozen=True)
class Topology:
    mode: str
    clients: int
    gateways: int
    layer_width: int
    services: int
    providers: int

    @classmethod
    def from_config(cls, mode: str, config: TopologyConfig) -> 'Topology':
        if mode not in ('echomix', 'loopix'):
            raise ConfigError(f'unknown mode {mode!r}', field='mode')
        return cls(mode, config.clients, config.gateways, config.layer_width, config.services, config.providers)

    @cached_property
    def client_nodes(self) -> list[str]:
        return [client_name(i) for i in range(self.clients)]

    @cached_property
    def gateway_nodes(self) -> list[str]:
        return [f'gw-{i}' for i in range(self.gateways)] if self.mode == 'echomix' else []

    @cached_property
    def service_nodes(self) -> list[str]:
        return [f'svc-{i}' for i in range(self.services)] if self.mode == 'echomix' else []

    @cached_property
    def provider_nodes(self) -> list[str]:
        return [f'prov-{i}' for i in range(self.providers)] if self.mode == 'loopix' else []

    @cached_property
    def layers(self) -> list[list[str]]:
        return [[mix_name(layer, i) for i in range(self.layer_width)] for layer in range(1, MIX_LAYERS + 1)]

    @cached_property
    def mix_nodes(self) -> list[str]:
        return [node for layer in self.layers for node in layer]

    @property
    def destinations(self) -> list[str]:
        """Final-hop destinations a GPA watches: services in echomix, providers in loopix."""
        return self.service_nodes if self.mode == 'echomix' else self.provider_nodes

    def role(self, node: str) -> str:
        prefix = node.split('-', 1)[0]
        match prefix:
            case 'client':
                return 'client'
            case 'gw':
                return 'gateway'
            case 'svc':
                return 'service'
            case 'prov':
                return 'provider'
            case 'L1' | 'L2' | 'L3':
                return prefix
        raise InvariantViolation(f'unknown node {node!r}')

    def provider_of(self, client: int) -> str:
        return f'prov-{client % self.providers}'

    def check_link(self, src: str, dst: str):
        links = ECHOMIX_LINKS if self.mode == 'echomix' else LOOPIX_LINKS
        if (self.role(src), self.role(dst)) not in links:
            raise InvariantViolation(f'{src} -> {dst} breaks the layer order of {self.mode} mode')

    def echo_route(self, gateway: str, mixes: list[str], service: str) -> list[str]:
        """gateway, L1, L2, L3, service, L3', L2', L1', gateway: nine delaying steps."""
        return [gateway, *mixes[:3], service, *mixes[3:], gateway]

    def inter_layer_links(self, first: int = 1) -> list[tuple[str, str]]:
        """Every link from layer ``first`` to layer ``first + 1``."""
        return [(a, b) for a in self.layers[first - 1] for b in self.layers[first]]
