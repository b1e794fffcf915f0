"""Small shared helpers: stable seeding, digests, stdin/stdout-aware IO."""

from __future__ import annotations

import hashlib
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator


def derive_seed(*parts: object) -> int:
    """Derive a 64-bit seed from heterogeneous parts, stable across runs
    and platforms (unlike hash()). Used to give every (sample, mode) pair
    its own RNG so parallel execution order cannot change outputs."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@contextmanager
def open_input(path: str) -> Iterator[IO[str]]:
    """Open a text input; '-' means standard input."""
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as fh:
            yield fh


@contextmanager
def open_output(path: str) -> Iterator[IO[str]]:
    """Open a text output; '-' means standard output."""
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh
