"""Versioned line-delimited trace output.

The first record names the schema and version. Link records follow in event order, then one summary
record. Records never contain wall-clock time, so equal (scenario, seed) pairs give equal bytes.
"""

import json
import logging
from pathlib import Path

from pydantic import BaseModel, Field

from mixnet_workbench.dto.reports import SimulationSummary
from mixnet_workbench.dto.scenario import ScenarioConfig
from mixnet_workbench.errors import ConfigError
from mixnet_workbench.mixsim.observer import LinkLog

logger = logging.getLogger(__name__)

TRACE_SCHEMA = 'mixnet-workbench/trace'
TRACE_VERSION = 1


class TraceHeader(BaseModel):
    type: str = 'header'
    schema_name: str = Field(TRACE_SCHEMA, alias='schema')
    version: int = TRACE_VERSION
    seed: int
    scenario: ScenarioConfig

    model_config = {'populate_by_name': True}


def write_trace(path: Path, scenario: ScenarioConfig, seed: int, log: LinkLog, summary: SimulationSummary) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8') as out:
            header = TraceHeader(seed=seed, scenario=scenario)
            out.write(header.model_dump_json(by_alias=True) + '\n')
            for t, src, dst, size in log:
                out.write(json.dumps({'type': 'link', 't': round(t, 9), 'src': src, 'dst': dst, 'size': size}) + '\n')
            out.write(json.dumps({'type': 'summary', **summary.model_dump(mode='json')}) + '\n')
    except OSError as e:
        raise ConfigError(f'cannot write trace: {e}', field=str(path)) from e
    logger.info(f'Trace with {len(log)} link records written to {path}')
    return path


def read_trace_header(path: Path) -> TraceHeader:
    with path.open(encoding='utf-8') as f:
        return TraceHeader.model_validate_json(f.readline())
