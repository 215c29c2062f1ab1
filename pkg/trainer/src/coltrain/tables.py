"""Minimal CSV lake reading for the trainer.

The lake directory layout (one RFC-4180 CSV per table, header row first) is
the shared input contract with the search engine; this module deliberately
reimplements just enough of it rather than importing the engine.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class Table:
    table_id: str
    headers: tuple[str, ...]
    columns: tuple[tuple[str, ...], ...]  # column-major cells

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    def rows(self) -> list[tuple[str, ...]]:
        return [tuple(col[r] for col in self.columns) for r in range(self.n_rows)]


def from_rows(table_id: str, headers: list[str], rows: list[list[str]]) -> Table:
    width = max(len(headers), max((len(r) for r in rows), default=0))
    if width == 0:
        raise ValueError(f"{table_id}: no columns")
    padded_headers = tuple(list(headers) + [""] * (width - len(headers)))
    columns = tuple(
        tuple(row[j] if j < len(row) else "" for row in rows) for j in range(width)
    )
    return Table(table_id=table_id, headers=padded_headers, columns=columns)


def load_table(path: str | Path) -> Table:
    path = Path(path)
    with open(path, newline="", encoding="utf-8", errors="replace") as f:
        parsed = list(csv.reader(f))
    if not parsed:
        raise ValueError(f"{path}: empty file")
    return from_rows(path.stem, parsed[0], parsed[1:])


def load_lake(directory: str | Path) -> list[Table]:
    """All parseable tables under the directory, sorted by table_id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"lake directory not found: {directory}")
    tables = []
    for path in sorted(directory.rglob("*.csv")):
        try:
            tables.append(load_table(path))
        except ValueError:
            continue
    return sorted(tables, key=lambda t: t.table_id)
