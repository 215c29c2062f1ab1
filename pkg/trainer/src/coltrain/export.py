"""SMBE store writer: the binary contract consumed by the search engine.

Layout (little-endian): magic ``SMBE`` | version u8 = 1 | dim u32 |
count u32, then per record: table_id_len u16 | table_id UTF-8 | col_idx u16
| dim x f32. This is the only interface shared with the engine.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .tables import Table
from .train import EncoderModel, encode_table

SMBE_MAGIC = b"SMBE"
SMBE_VERSION = 1


def write_smbe(
    entries: list[tuple[str, int, np.ndarray]], dim: int, path: str | Path
) -> None:
    with open(path, "wb") as f:
        f.write(SMBE_MAGIC)
        f.write(struct.pack("<BII", SMBE_VERSION, dim, len(entries)))
        for table_id, col_idx, vector in entries:
            if vector.shape != (dim,):
                raise ValueError(f"vector for ({table_id}, {col_idx}) has wrong dim")
            raw = table_id.encode("utf-8")
            f.write(struct.pack("<H", len(raw)))
            f.write(raw)
            f.write(struct.pack("<H", col_idx))
            f.write(np.ascontiguousarray(vector, dtype="<f4").tobytes())


def read_smbe(path: str | Path) -> tuple[int, list[tuple[str, int, np.ndarray]]]:
    """Reader used for round-trip checks on exported stores."""
    data = Path(path).read_bytes()
    if data[:4] != SMBE_MAGIC:
        raise ValueError(f"{path}: bad magic")
    version, dim, count = struct.unpack_from("<BII", data, 4)
    if version != SMBE_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    offset = 13
    entries = []
    for _ in range(count):
        (tid_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        table_id = data[offset : offset + tid_len].decode("utf-8")
        offset += tid_len
        (col_idx,) = struct.unpack_from("<H", data, offset)
        offset += 2
        vector = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += dim * 4
        entries.append((table_id, col_idx, vector))
    return dim, entries


def export_embeddings(model: EncoderModel, tables: list[Table], path: str | Path) -> int:
    """Encode every column of every table and write one SMBE store.

    Tables are processed in sorted table_id order; returns the entry count.
    """
    entries: list[tuple[str, int, np.ndarray]] = []
    for table in sorted(tables, key=lambda t: t.table_id):
        vectors = encode_table(model, table)
        for col_idx in range(vectors.shape[0]):
            entries.append((table.table_id, col_idx, vectors[col_idx]))
    write_smbe(entries, model.dim, path)
    return len(entries)
