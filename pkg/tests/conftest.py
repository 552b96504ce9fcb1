import random

import pytest

from mixnet_workbench.config import Settings, get_settings
from mixnet_workbench.mixsim.rng import RandomStreams


@pytest.fixture
def entropy() -> random.Random:
    return RandomStreams(7).entropy('tests')


@pytest.fixture
def settings(tmp_path, monkeypatch) -> Settings:
    monkeypatch.setenv('MIXNET_OUTPUT_DIR', str(tmp_path / 'out'))
    monkeypatch.delenv('MIXNET_SCENARIO_DIR', raising=False)
    get_settings.cache_clear()
    yield get_settings()
    get_settings.cache_clear()
