from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict  # type: ignore


class Settings(BaseSettings):
    default_seed: int = Field(1, description='Seed used when a command gets no --seed flag')
    output_dir: Path = Field(Path('out'), description='Directory receiving traces and summaries')
    log_level: str = Field('INFO')
    scenario_dir: Path | None = Field(None, description='Extra directory searched for scenario files')

    epoch_seconds: float = Field(1200.0, gt=0, description='PKI epoch length in seconds')
    pending_read_delay_min: float = Field(1.0, ge=0)
    pending_read_delay_max: float = Field(30.0, gt=0)
    courier_cache_ttl: float = Field(1200.0, gt=0, description='Courier response cache lifetime in seconds')
    courier_rotation_retries: int = Field(8, ge=1)
    replication_factor: int = Field(2, ge=1)
    box_payload_size: int = Field(1024, ge=16, description='Fixed plaintext size of a stored box in bytes')

    selftest_scale: float = Field(1.0, gt=0, description='Multiplier on selftest sample sizes')

    model_config = SettingsConfigDict(env_file='.env', env_prefix='MIXNET_', extra='ignore')


@lru_cache
def get_settings():
    return Settings()
