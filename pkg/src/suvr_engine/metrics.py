"""
JSON Lines metrics emission.

Each record is serialized to one line and written with a single call
followed by a flush, so an interrupted run leaves only complete lines.
"""

import json
import logging
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from pydantic import BaseModel

logger = logging.getLogger(__name__)


def _to_line(record: BaseModel | dict[str, Any]) -> str:
    if isinstance(record, BaseModel):
        return record.model_dump_json() + "\n"
    return json.dumps(record, sort_keys=True) + "\n"


class MetricsWriter:
    """Append-only line writer; use as a context manager."""

    def __init__(self, path: str | Path, truncate: bool = True):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = self.path.open("w" if truncate else "a", encoding="utf-8")
        self.count = 0

    def write(self, record: BaseModel | dict[str, Any]) -> None:
        self._file.write(_to_line(record))
        self._file.flush()
        self.count += 1

    def close(self) -> None:
        if not self._file.closed:
            self._file.close()
            logger.debug(f"Wrote {self.count} records to {self.path}")

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()


def emit_metrics(records: Iterable[BaseModel | dict[str, Any]], path: str | Path) -> int:
    """Append every record to `path`; returns the number of lines written."""
    with MetricsWriter(path, truncate=False) as writer:
        for record in records:
            writer.write(record)
        return writer.count


def read_metrics(path: str | Path) -> list[dict[str, Any]]:
    """Parse a metrics file back into dictionaries, one per line."""
    with Path(path).open(encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]
