"""Line-delimited JSON record IO.

All pipeline file formats are UTF-8 text with one JSON object per line.
Writers emit keys in a fixed order so identical runs produce byte-identical
files.
"""

from __future__ import annotations

import json
from typing import IO, Any, Iterable, Iterator

from ca_harvest.errors import DataFormatError


def iter_records(stream: IO[str]) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (line_number, record) for every nonempty line.

    Raises DataFormatError on lines that are not JSON objects; callers with
    a skip-and-count policy (ingestion) parse lines themselves.
    """
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"line {lineno}: invalid record: {exc}") from None
        if not isinstance(record, dict):
            raise DataFormatError(f"line {lineno}: record is not an object")
        yield lineno, record


def parse_line(line: str) -> dict[str, Any] | None:
    """Parse one record line; None if it is not a JSON object."""
    try:
        record = json.loads(line)
    except json.JSONDecodeError:
        return None
    return record if isinstance(record, dict) else None


def dump_record(record: dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def write_records(stream: IO[str], records: Iterable[dict[str, Any]]) -> int:
    n = 0
    for record in records:
        stream.write(dump_record(record))
        stream.write("\n")
        n += 1
    return n
