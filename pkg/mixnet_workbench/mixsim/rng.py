"""Named, seedable random substreams.

Every entity draws from its own stream keyed by name, so adding an entity never shifts the draws of
another one.
"""

import hashlib
import random

import numpy as np

_BLOCK = 4096


def _stream_key(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], 'big')


class RandomStreams:
    def __init__(self, seed: int):
        self.seed = seed
        self._generators: dict[str, np.random.Generator] = {}

    def generator(self, name: str) -> np.random.Generator:
        if name not in self._generators:
            sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(_stream_key(name),))
            self._generators[name] = np.random.default_rng(sequence)
        return self._generators[name]

    def entropy(self, name: str) -> random.Random:
        """A ``random.Random`` usable as an entropy source for the crypto layer (simulation only)."""
        return random.Random(self.seed * 2**64 + _stream_key(name))


class Draws:
    """Block-buffered scalar draws from one generator; keeps per-event cost low."""

    def __init__(self, generator: np.random.Generator):
        self.generator = generator
        self._exponential = np.empty(0)
        self._exp_pos = 0
        self._uniform = np.empty(0)
        self._uni_pos = 0

    def exponential(self, mean: float) -> float:
        if self._exp_pos >= len(self._exponential):
            self._exponential = self.generator.standard_exponential(_BLOCK)
            self._exp_pos = 0
        value = self._exponential[self._exp_pos]
        self._exp_pos += 1
        return float(value) * mean

    def uniform(self) -> float:
        if self._uni_pos >= len(self._uniform):
            self._uniform = self.generator.random(_BLOCK)
            self._uni_pos = 0
        value = self._uniform[self._uni_pos]
        self._uni_pos += 1
        return float(value)

    def index(self, n: int) -> int:
        return min(int(self.uniform() * n), n - 1)
