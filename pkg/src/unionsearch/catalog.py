"""CSV data lake catalog: parse a directory of tables into memory.

Tables are stored column-wise as raw cell text. Headers are kept as metadata
only and are never used as match features.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)


class CatalogError(Exception):
    """Raised when a table or lake cannot be loaded."""


@dataclass(frozen=True)
class Column:
    """One table column: header text plus the raw cell values, in row order."""

    header: str
    values: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Table:
    """A parsed CSV table. All columns have exactly ``n_rows`` values."""

    table_id: str
    columns: tuple[Column, ...]
    n_rows: int

    def __post_init__(self) -> None:
        if not self.table_id:
            raise CatalogError("table_id must be nonempty")
        if not self.columns:
            raise CatalogError(f"table {self.table_id!r} has zero columns")
        for col in self.columns:
            if len(col.values) != self.n_rows:
                raise CatalogError(
                    f"table {self.table_id!r}: column {col.header!r} has "
                    f"{len(col.values)} values, expected {self.n_rows}"
                )

    def __len__(self) -> int:
        """Number of columns."""
        return len(self.columns)


@dataclass
class LakeCatalog:
    """All parseable tables of a lake directory, keyed by table_id.

    Iteration order over ``tables`` is lexicographic by table_id.
    ``n_skipped`` counts files that failed to parse and were dropped.
    """

    tables: dict[str, Table] = field(default_factory=dict)
    n_skipped: int = 0

    @property
    def total_columns(self) -> int:
        return sum(len(t) for t in self.tables.values())

    def __len__(self) -> int:
        return len(self.tables)

    def __iter__(self):
        return iter(self.tables.values())


def _parse_rows(rows: list[list[str]], table_id: str) -> Table:
    if not rows:
        raise CatalogError(f"{table_id}: empty file (no header row)")
    header = rows[0]
    data = rows[1:]
    width = max(len(header), max((len(r) for r in data), default=0))
    if width == 0:
        raise CatalogError(f"{table_id}: zero data columns")
    headers = list(header) + [""] * (width - len(header))
    # Ragged rows are padded with empty strings; open-data CSVs are dirty.
    n_rows = len(data)
    columns = []
    for j in range(width):
        values = tuple(row[j] if j < len(row) else "" for row in data)
        columns.append(Column(header=headers[j], values=values))
    return Table(table_id=table_id, columns=tuple(columns), n_rows=n_rows)


def load_table(path: str | Path, table_id: str | None = None) -> Table:
    """Parse one CSV file (RFC-4180, UTF-8 with invalid bytes replaced).

    The first row is always treated as the header. Ragged rows are padded to
    the widest row with empty strings.
    """
    path = Path(path)
    if table_id is None:
        table_id = path.stem
    try:
        with open(path, newline="", encoding="utf-8", errors="replace") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise CatalogError(f"cannot read {path}: {exc}") from exc
    except csv.Error as exc:
        raise CatalogError(f"cannot parse {path}: {exc}") from exc
    return _parse_rows(rows, table_id)


def load_lake(directory: str | Path, workers: int = 1) -> LakeCatalog:
    """Load every ``*.csv`` under ``directory`` (recursively) into a catalog.

    Unparseable files are skipped with a warning and counted. Duplicate file
    stems (same name in different subdirectories) are disambiguated with a
    deterministic ``__N`` suffix assigned in sorted-path order, so the result
    does not depend on load order or worker count.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise CatalogError(f"lake directory not found: {directory}")
    paths = sorted(directory.rglob("*.csv"))

    def _try_load(path: Path) -> Table | None:
        try:
            return load_table(path)
        except CatalogError as exc:
            logger.warning("skipping %s: %s", path, exc)
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            loaded = list(pool.map(_try_load, paths))
    else:
        loaded = [_try_load(p) for p in paths]

    catalog = LakeCatalog()
    n_skipped = 0
    seen: set[str] = set()
    staged: list[Table] = []
    for table in loaded:
        if table is None:
            n_skipped += 1
            continue
        table_id = table.table_id
        if table_id in seen:
            n = 2
            while f"{table_id}__{n}" in seen:
                n += 1
            table_id = f"{table_id}__{n}"
            table = Table(table_id=table_id, columns=table.columns, n_rows=table.n_rows)
        seen.add(table_id)
        staged.append(table)
    for table in sorted(staged, key=lambda t: t.table_id):
        catalog.tables[table.table_id] = table
    catalog.n_skipped = n_skipped
    return catalog
