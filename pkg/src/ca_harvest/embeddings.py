"""Embedding storage, similarity, the fallback embedder, and the
nearest-centroid classifier.

Real sentence embeddings are produced outside this package and arrive
through the binary store format below. The fallback hash embedder
exists so every pipeline stage (and the test suite) can run without
that sidecar; it is a deterministic bag-of-tokens projection, not a
semantic model.

Store format, little-endian throughout:

    magic  4 bytes  b"CAES"
    u16    format version, currently 1
    u32    dimension D
    u64    record count
    then per record: [u16 id length][id, UTF-8][D x f32]

Records must be sorted by the UTF-8 byte order of their ids; readers
reject unsorted or duplicated ids. All load errors carry the byte
offset at which the problem was detected.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from ca_harvest import kernels
from ca_harvest.errors import (
    DataFormatError,
    DegenerateInputError,
    MissingDataError,
    StoreError,
)
from ca_harvest.labels import name_sort_key

MAGIC = b"CAES"
FORMAT_VERSION = 1
FALLBACK_DIMENSION = 256

_HEADER = struct.Struct("<HIQ")


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DegenerateInputError(
            f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}"
        )
    na = math.sqrt(float(np.dot(a, a)))
    nb = math.sqrt(float(np.dot(b, b)))
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("cosine similarity of a zero-norm vector")
    if np.array_equal(a, b):
        return 1.0
    cos = float(np.dot(a, b)) / (na * nb)
    return min(1.0, max(-1.0, cos))


def mean_pool(windows: Iterable) -> np.ndarray:
    """Componentwise mean of the window vectors (float64)."""
    try:
        stacked = np.asarray(list(windows), dtype=np.float64)
    except ValueError:
        raise DegenerateInputError("mean_pool: window dimensions differ") from None
    if stacked.size == 0:
        raise DegenerateInputError("mean_pool of an empty window list")
    if stacked.ndim != 2:
        raise DegenerateInputError("mean_pool expects a list of vectors")
    return stacked.mean(axis=0)


def fallback_hash_embed(text: str, dimension: int = FALLBACK_DIMENSION) -> np.ndarray:
    """Deterministic token-hash embedding, L2-normalized, float32.

    Each token is hashed with blake2b; the first 8 digest bytes pick a
    bucket, the low bit of the 9th picks the sign. Stable across runs
    and platforms by construction.
    """
    if dimension < 8:
        raise ValueError("fallback embedding dimension must be >= 8")
    tokens = kernels.tokenize(text)
    if not tokens:
        raise DegenerateInputError("cannot embed a zero-token text")
    vec = np.zeros(dimension, dtype=np.float64)
    for token in tokens:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=16).digest()
        bucket = int.from_bytes(digest[:8], "little") % dimension
        sign = 1.0 if (digest[8] & 1) == 0 else -1.0
        vec[bucket] += sign
    norm = math.sqrt(float(np.dot(vec, vec)))
    if norm == 0.0:
        raise DegenerateInputError("degenerate hash embedding: signs cancelled")
    return (vec / norm).astype(np.float32)


@dataclass
class EmbeddingStore:
    dimension: int
    entries: dict[str, np.ndarray] = field(default_factory=dict)
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def vector(self, key: str) -> np.ndarray:
        try:
            return self.entries[key]
        except KeyError:
            raise MissingDataError(f"no embedding vector for id {key!r}") from None


def build_fallback_store(
    items: Iterable[tuple[str, str]], dimension: int = FALLBACK_DIMENSION
) -> EmbeddingStore:
    """Embed (id, text) pairs with the fallback embedder."""
    entries = {}
    for key, text in items:
        entries[key] = fallback_hash_embed(text, dimension)
    return EmbeddingStore(
        dimension=dimension, entries=entries, provenance="fallback-hash"
    )


def save_embedding_store(store: EmbeddingStore, path: str | Path) -> None:
    if store.dimension < 1:
        raise DataFormatError("store dimension must be >= 1")
    encoded = []
    for key, vec in store.entries.items():
        arr = np.asarray(vec, dtype="<f4")
        if arr.ndim != 1 or arr.shape[0] != store.dimension:
            raise DataFormatError(
                f"vector for id {key!r} has dimension {arr.shape}, "
                f"store dimension is {store.dimension}"
            )
        if not np.isfinite(arr).all():
            raise DataFormatError(f"vector for id {key!r} has non-finite entries")
        id_bytes = key.encode("utf-8")
        if len(id_bytes) > 0xFFFF:
            raise DataFormatError(f"id {key!r} exceeds 65535 UTF-8 bytes")
        encoded.append((id_bytes, arr.tobytes()))
    encoded.sort(key=lambda pair: pair[0])
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(FORMAT_VERSION, store.dimension, len(encoded)))
        for id_bytes, payload in encoded:
            fh.write(struct.pack("<H", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(payload)


def load_embedding_store(path: str | Path) -> EmbeddingStore:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise StoreError("bad magic (not an embedding store)", 0)
    if len(data) < 4 + _HEADER.size:
        raise StoreError("truncated header", len(data))
    version, dimension, count = _HEADER.unpack_from(data, 4)
    if version != FORMAT_VERSION:
        raise StoreError(f"unsupported format version {version}", 4)
    if dimension < 1:
        raise StoreError("zero dimension", 6)
    pos = 4 + _HEADER.size
    vec_bytes = 4 * dimension
    entries: dict[str, np.ndarray] = {}
    prev_id: bytes | None = None
    for _ in range(count):
        record_off = pos
        if pos + 2 > len(data):
            raise StoreError("truncated record (id length)", record_off)
        (id_len,) = struct.unpack_from("<H", data, pos)
        pos += 2
        if pos + id_len > len(data):
            raise StoreError("truncated record (id bytes)", record_off)
        id_bytes = data[pos : pos + id_len]
        try:
            key = id_bytes.decode("utf-8")
        except UnicodeDecodeError:
            raise StoreError("id is not valid UTF-8", record_off) from None
        pos += id_len
        if prev_id is not None:
            if id_bytes == prev_id:
                raise StoreError(f"duplicate id {key!r}", record_off)
            if id_bytes < prev_id:
                raise StoreError(f"ids not sorted at {key!r}", record_off)
        prev_id = id_bytes
        if pos + vec_bytes > len(data):
            raise StoreError("truncated record (vector bytes)", record_off)
        vec = np.frombuffer(data, dtype="<f4", count=dimension, offset=pos).copy()
        if not np.isfinite(vec).all():
            raise StoreError(f"non-finite values for id {key!r}", pos)
        entries[key] = vec
        pos += vec_bytes
    if pos != len(data):
        raise StoreError("trailing data after last record", pos)
    return EmbeddingStore(dimension=dimension, entries=entries, provenance=str(path))


@dataclass
class CentroidModel:
    centroids: dict[str, np.ndarray]
    class_counts: dict[str, int]

    @property
    def classes(self) -> list[str]:
        return sorted(self.centroids, key=name_sort_key)


def compute_centroids(labeled: Iterable[tuple[np.ndarray, str]]) -> CentroidModel:
    """Arithmetic mean of each class's vectors, in float64."""
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    for vec, label in labeled:
        arr = np.asarray(vec, dtype=np.float64)
        if label in sums:
            if arr.shape != sums[label].shape:
                raise DataFormatError("training vectors have differing dimensions")
            sums[label] = sums[label] + arr
            counts[label] += 1
        else:
            if sums and arr.shape[0] != next(iter(sums.values())).shape[0]:
                raise DataFormatError("training vectors have differing dimensions")
            sums[label] = arr.copy()
            counts[label] = 1
    if not sums:
        raise DegenerateInputError("cannot build a centroid model from no vectors")
    centroids = {
        label: sums[label] / counts[label]
        for label in sorted(sums, key=name_sort_key)
    }
    return CentroidModel(centroids=centroids, class_counts=counts)


def classify_centroid(v, model: CentroidModel) -> tuple[str, float]:
    """Class with the most similar centroid; fixed-order tie break.

    Ties (exactly equal cosines) resolve to the class earliest in the
    canonical label order, which is what `model.classes` yields.
    """
    if not model.centroids:
        raise DegenerateInputError("empty centroid model")
    q = np.asarray(v, dtype=np.float64)
    nq = math.sqrt(float(np.dot(q, q)))
    if nq == 0.0:
        raise DegenerateInputError("cannot classify a zero-norm vector")
    best_label = None
    best_sim = 0.0
    for label in model.classes:
        centroid = model.centroids[label]
        nc = math.sqrt(float(np.dot(centroid, centroid)))
        if nc == 0.0:
            raise DegenerateInputError(
                f"degenerate centroid model: zero-norm centroid for class {label!r}"
            )
        sim = float(np.dot(q, centroid)) / (nq * nc)
        if best_label is None or sim > best_sim:
            best_label = label
            best_sim = sim
    return best_label, best_sim


def save_centroid_model(model: CentroidModel, stream: IO[str]) -> None:
    for label in model.classes:
        record = {
            "label": label,
            "count": model.class_counts[label],
            "centroid": [float(x) for x in model.centroids[label]],
        }
        stream.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")))
        stream.write("\n")


def load_centroid_model(stream: IO[str]) -> CentroidModel:
    centroids: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    dimension = None
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"centroid model line {lineno}: {exc}") from None
        try:
            label = record["label"]
            count = record["count"]
            values = record["centroid"]
        except (TypeError, KeyError):
            raise DataFormatError(
                f"centroid model line {lineno}: expected label/count/centroid"
            ) from None
        if label in centroids:
            raise DataFormatError(
                f"centroid model line {lineno}: duplicate class {label!r}"
            )
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise DataFormatError(
                f"centroid model line {lineno}: centroid is not a vector"
            )
        if dimension is None:
            dimension = arr.shape[0]
        elif arr.shape[0] != dimension:
            raise DataFormatError(
                f"centroid model line {lineno}: dimension {arr.shape[0]} != {dimension}"
            )
        if not isinstance(count, int) or count < 1:
            raise DataFormatError(
                f"centroid model line {lineno}: count must be a positive integer"
            )
        centroids[label] = arr
        counts[label] = count
    if not centroids:
        raise DataFormatError("centroid model file has no classes")
    return CentroidModel(centroids=centroids, class_counts=counts)
