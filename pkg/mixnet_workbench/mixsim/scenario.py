"""Scenario loading: bundled names or TOML paths, validated into ``ScenarioConfig``."""

import logging
import sys
from importlib import resources
from pathlib import Path

from pydantic import ValidationError

from mixnet_workbench.config import Settings, get_settings
from mixnet_workbench.dto.scenario import ScenarioConfig
from mixnet_workbench.mixsim.errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

BUNDLED_PACKAGE = 'mixnet_workbench.scenarios'


def bundled_scenarios() -> list[str]:
    return sorted(
        entry.name.removesuffix('.toml')
        for entry in resources.files(BUNDLED_PACKAGE).iterdir()
        if entry.name.endswith('.toml')
    )


def parse_scenario(text: str, source: str = '<string>') -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f'invalid TOML: {e}', field=source) from e
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = '.'.join(str(part) for part in first['loc']) or 'scenario'
        raise ConfigError(f'{first["msg"]} (in {source})', field=location) from e


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f'cannot read scenario file: {e.strerror}', field=str(path)) from e


def load_scenario(name_or_path: str, settings: Settings | None = None) -> ScenarioConfig:
    """Resolve a scenario by file path, then by name in ``scenario_dir``, then among bundled scenarios."""
    settings = settings or get_settings()
    path = Path(name_or_path)
    if path.suffix == '.toml' or path.exists():
        return parse_scenario(_read(path), str(path))
    if settings.scenario_dir is not None:
        candidate = settings.scenario_dir / f'{name_or_path}.toml'
        if candidate.exists():
            return parse_scenario(_read(candidate), str(candidate))
    if name_or_path in bundled_scenarios():
        text = resources.files(BUNDLED_PACKAGE).joinpath(f'{name_or_path}.toml').read_text(encoding='utf-8')
        logger.debug(f'Loaded bundled scenario {name_or_path}')
        return parse_scenario(text, name_or_path)
    raise ConfigError(
        f'no scenario file or bundled scenario named {name_or_path!r} (bundled: {", ".join(bundled_scenarios())})',
        field='config',
    )
