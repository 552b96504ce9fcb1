import argparse
import json
import sys
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from typing import TextIO

from pydantic import BaseModel

from mixnet_workbench.config import Settings

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

Handler = Callable[[argparse.Namespace, Settings], int]


@dataclass(frozen=True)
class Command:
    """A subcommand: its name, the flags it adds to the parser and the function that runs it."""

    name: str
    help: str
    configure: Callable[[argparse.ArgumentParser], None]
    handler: Handler


def add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--seed', type=int, default=None, help='Random seed (default: MIXNET_DEFAULT_SEED)')
    parser.add_argument(
        '--records', action='store_true', help='Print one JSON record per line instead of a table'
    )


def emit_records(models: Iterable[BaseModel], out: TextIO | None = None):
    out = out or sys.stdout
    for model in models:
        out.write(json.dumps({'type': type(model).__name__, **model.model_dump(mode='json')}) + '\n')


# Floats keep six significant digits; missing values print as a dash
def _cell(value) -> str:
    if isinstance(value, float):
        return f'{value:.6g}'
    if value is None:
        return '-'
    return str(value)


def print_table(rows: Sequence[Sequence], headers: Sequence[str], out: TextIO | None = None):
    """Left-aligned plain-text table; headers carry units, e.g. ``header (B)``."""
    out = out or sys.stdout
    cells = [[_cell(v) for v in row] for row in rows]
    widths = [max([len(h), *(len(r[i]) for r in cells)]) for i, h in enumerate(headers)]
    out.write('  '.join(h.ljust(w) for h, w in zip(headers, widths)).rstrip() + '\n')
    out.write('  '.join('-' * w for w in widths) + '\n')
    for row in cells:
        out.write('  '.join(c.ljust(w) for c, w in zip(row, widths)).rstrip() + '\n')
