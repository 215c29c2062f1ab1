"""Deterministic column embeddings and the SMBE vector store format.

The baseline embedder is signed feature hashing over IDF-weighted tokens.
The hash family is pinned for reproducibility across processes and platforms:
FNV-1a 64-bit over the UTF-8 token, post-mixed with the splitmix64 finalizer
(raw FNV has near-linear low bits, which would bias both the coordinate and
the sign). The mixed value selects the coordinate; the same value XORed with
a fixed salt and mixed again selects the sign via its bit 0 (set means +1).
Changing any of these constants invalidates every stored vector, so they are
part of the store's version-1 contract.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .catalog import LakeCatalog, Table
from .preprocess import SerializedColumn, TokenStats, serialize_table

_FNV64_OFFSET = 0xCBF29CE484222325
_FNV64_PRIME = 0x100000001B3
_SIGN_SALT = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

SMBE_MAGIC = b"SMBE"
SMBE_VERSION = 1


class StoreFormatError(Exception):
    """Raised for malformed or truncated SMBE files."""


def fnv1a64(data: bytes) -> int:
    h = _FNV64_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV64_PRIME) & _MASK64
    return h


def mix64(h: int) -> int:
    """splitmix64 finalizer; full avalanche over all 64 bits."""
    h ^= h >> 33
    h = (h * 0xFF51AFD7ED558CCD) & _MASK64
    h ^= h >> 33
    h = (h * 0xC4CEB9FE1A85EC53) & _MASK64
    return h ^ (h >> 33)


@lru_cache(maxsize=1 << 18)
def _token_hashes(token: str) -> tuple[int, int]:
    base = fnv1a64(token.encode("utf-8"))
    return mix64(base), mix64(base ^ _SIGN_SALT)


@dataclass(frozen=True)
class ColumnEmbedding:
    """A dense vector for one (table_id, col_idx) column."""

    table_id: str
    col_idx: int
    vector: np.ndarray  # float32, L2-normalized unless all-zero

    @property
    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.vector.astype(np.float64)))

    @property
    def key(self) -> tuple[str, int]:
        return (self.table_id, self.col_idx)


@dataclass
class EmbeddingStore:
    """Ordered collection of column embeddings with a fixed dimension."""

    dim: int
    entries: list[ColumnEmbedding] = field(default_factory=list)
    index: dict[tuple[str, int], int] = field(default_factory=dict)
    _matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def add(self, entry: ColumnEmbedding) -> None:
        if entry.vector.shape != (self.dim,):
            raise ValueError(
                f"vector of {entry.key} has shape {entry.vector.shape}, "
                f"store dim is {self.dim}"
            )
        if entry.key in self.index:
            raise ValueError(f"duplicate column key {entry.key}")
        self.index[entry.key] = len(self.entries)
        self.entries.append(entry)
        self._matrix = None

    def get(self, table_id: str, col_idx: int) -> ColumnEmbedding:
        return self.entries[self.index[(table_id, col_idx)]]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def matrix(self) -> np.ndarray:
        """(n, dim) float32 matrix of all vectors, cached, in entry order."""
        if self._matrix is None or len(self._matrix) != len(self.entries):
            if self.entries:
                self._matrix = np.vstack([e.vector for e in self.entries])
            else:
                self._matrix = np.zeros((0, self.dim), dtype=np.float32)
        return self._matrix

    def table_ids(self) -> list[str]:
        return [e.table_id for e in self.entries]


def embed_column_baseline(
    sc: SerializedColumn, stats: TokenStats, dim: int = 256
) -> ColumnEmbedding:
    """Signed feature hashing of the serialized tokens, IDF-weighted.

    An empty token list embeds to the zero vector, which by definition has
    cosine 0 with everything and therefore never forms a qualifying edge.
    """
    if dim < 8:
        raise ValueError("dim must be >= 8")
    acc = np.zeros(dim, dtype=np.float64)
    for token in sc.tokens:
        h_coord, h_sign = _token_hashes(token)
        sign = 1.0 if (h_sign & 1) else -1.0
        acc[h_coord % dim] += sign * stats.idf(token)
    norm = np.linalg.norm(acc)
    if norm > 0:
        acc /= norm
    return ColumnEmbedding(sc.table_id, sc.col_idx, acc.astype(np.float32))


def cosine(a: ColumnEmbedding, b: ColumnEmbedding) -> float:
    """Cosine similarity in float64; 0 when either vector is all-zero."""
    if a.vector.shape != b.vector.shape:
        raise ValueError(
            f"dimension mismatch: {a.vector.shape} vs {b.vector.shape}"
        )
    va = a.vector.astype(np.float64)
    vb = b.vector.astype(np.float64)
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(va, vb) / (na * nb))


def embed_table(
    table: Table,
    stats: TokenStats,
    method: str = "tfidf_entity",
    max_len: int = 256,
    dim: int = 256,
    seed: int = 0,
) -> list[ColumnEmbedding]:
    """Serialize then embed every column of one table."""
    serialized = serialize_table(table, stats, method=method, max_len=max_len, seed=seed)
    return [embed_column_baseline(sc, stats, dim=dim) for sc in serialized]


def embed_catalog(
    catalog: LakeCatalog,
    stats: TokenStats,
    method: str = "tfidf_entity",
    max_len: int = 256,
    dim: int = 256,
    seed: int = 0,
) -> EmbeddingStore:
    """Embed every column of the lake, in catalog (lexicographic) order."""
    store = EmbeddingStore(dim=dim)
    for table in catalog:
        for emb in embed_table(table, stats, method=method, max_len=max_len, dim=dim, seed=seed):
            store.add(emb)
    return store


def write_store(store: EmbeddingStore, path: str | Path) -> None:
    """Write the SMBE binary format (little-endian).

    Layout: magic ``SMBE`` | version u8 | dim u32 | count u32, then per
    record: table_id_len u16 | table_id UTF-8 | col_idx u16 | dim x f32.
    """
    path = Path(path)
    with open(path, "wb") as f:
        f.write(SMBE_MAGIC)
        f.write(struct.pack("<BII", SMBE_VERSION, store.dim, len(store.entries)))
        for entry in store.entries:
            tid = entry.table_id.encode("utf-8")
            f.write(struct.pack("<H", len(tid)))
            f.write(tid)
            f.write(struct.pack("<H", entry.col_idx))
            f.write(np.ascontiguousarray(entry.vector, dtype="<f4").tobytes())


def read_store(path: str | Path) -> EmbeddingStore:
    """Read an SMBE file back, bit-exactly."""
    path = Path(path)
    data = Path(path).read_bytes()
    if len(data) < 13:
        raise StoreFormatError(f"{path}: truncated header ({len(data)} bytes)")
    if data[:4] != SMBE_MAGIC:
        raise StoreFormatError(f"{path}: bad magic {data[:4]!r}")
    version, dim, count = struct.unpack_from("<BII", data, 4)
    if version != SMBE_VERSION:
        raise StoreFormatError(f"{path}: unsupported version {version}")
    if dim < 1:
        raise StoreFormatError(f"{path}: invalid dim {dim}")
    store = EmbeddingStore(dim=dim)
    offset = 13
    vec_bytes = dim * 4
    for _ in range(count):
        if offset + 2 > len(data):
            raise StoreFormatError(f"{path}: truncated record header")
        (tid_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + tid_len + 2 + vec_bytes > len(data):
            raise StoreFormatError(f"{path}: truncated record")
        table_id = data[offset : offset + tid_len].decode("utf-8")
        offset += tid_len
        (col_idx,) = struct.unpack_from("<H", data, offset)
        offset += 2
        vector = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += vec_bytes
        entry = ColumnEmbedding(table_id, col_idx, vector)
        if entry.key in store.index:
            raise StoreFormatError(f"{path}: duplicate key {entry.key}")
        store.add(entry)
    return store
