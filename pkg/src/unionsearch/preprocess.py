"""Column serialization: TF-IDF token scoring and bounded sampling.

Every sampling method produces a token list of at most ``budget`` tokens per
column, deduplicated at its sampling unit (tokens, whole cells, or whole
rows). All methods except ``alphaHead`` emit selected units in their original
order; ``alphaHead`` emits tokens alphabetically, which is its defining sort.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .catalog import Column, LakeCatalog, Table

SAMPLING_METHODS = (
    "head",
    "alphaHead",
    "random",
    "everyN",
    "uniform",
    "tfidf_token",
    "tfidf_entity",
    "tfidf_row",
    "row_ordered",
)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(cell: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation boundaries."""
    return _TOKEN_RE.findall(cell.lower())


@dataclass
class TokenStats:
    """Lake-wide document frequencies; documents are columns.

    ``idf(token) = ln(m_columns) / df(token)``, the formula applied verbatim
    (ratio inside the log is deliberately not used; see repo notes). Tokens
    never seen in the lake are scored as if they occurred in one column.
    """

    m_columns: int
    df: dict[str, int]

    def idf(self, token: str) -> float:
        return math.log(self.m_columns) / self.df.get(token, 1)


def compute_idf(catalog: LakeCatalog) -> TokenStats:
    """Count, for each token, the number of distinct columns containing it."""
    if len(catalog) == 0:
        raise ValueError("catalog is empty")
    df: dict[str, int] = {}
    m = 0
    for table in catalog:
        for column in table.columns:
            m += 1
            seen: set[str] = set()
            for cell in column.values:
                seen.update(tokenize(cell))
            for token in seen:
                df[token] = df.get(token, 0) + 1
    return TokenStats(m_columns=m, df=df)


def score_cell(cell: str, stats: TokenStats, mode: str = "sum") -> float:
    """Sum or average of token IDF scores; an empty cell scores 0."""
    tokens = tokenize(cell)
    if not tokens:
        return 0.0
    total = sum(stats.idf(t) for t in tokens)
    if mode == "sum":
        return total
    if mode == "avg":
        return total / len(tokens)
    raise ValueError(f"unknown score mode: {mode!r}")


@dataclass(frozen=True)
class SerializedColumn:
    """A column reduced to a bounded token list by one sampling method."""

    table_id: str
    col_idx: int
    tokens: tuple[str, ...]
    method: str
    budget: int


def _unique_in_order(items: list[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def _column_tokens(column: Column) -> list[str]:
    tokens: list[str] = []
    for cell in column.values:
        tokens.extend(tokenize(cell))
    return tokens


def _emit_in_order(unique: list[str], selected: set[int]) -> list[str]:
    return [unique[i] for i in range(len(unique)) if i in selected]


def _select_cells_by_score(
    cells: list[str], scores: list[float], budget: int
) -> list[str]:
    # Rank unique cells by (score desc, position asc), accumulate whole cells
    # until the token budget is met, then emit them in original order.
    order = sorted(range(len(cells)), key=lambda i: (-scores[i], i))
    chosen: list[int] = []
    total = 0
    for i in order:
        if total >= budget:
            break
        chosen.append(i)
        total += len(tokenize(cells[i]))
    tokens: list[str] = []
    for i in sorted(chosen):
        tokens.extend(tokenize(cells[i]))
    return tokens[:budget]


def serialize_column(
    column: Column,
    stats: TokenStats,
    method: str = "tfidf_entity",
    budget: int = 64,
    seed: int = 0,
) -> SerializedColumn:
    """Serialize one column under a sampling method.

    ``table_id``/``col_idx`` are filled by :func:`serialize_table`; direct
    callers get placeholder identity. Row-level methods treat the single
    column as a one-column table, so their row unit degenerates to the cell.
    """
    return _serialize_column(column, stats, method, budget, seed, "", 0)


def _serialize_column(
    column: Column,
    stats: TokenStats,
    method: str,
    budget: int,
    seed: int,
    table_id: str,
    col_idx: int,
) -> SerializedColumn:
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if method not in SAMPLING_METHODS:
        raise ValueError(f"unknown sampling method: {method!r}")

    if method in ("tfidf_entity", "tfidf_row"):
        # Cell-level (and degenerate row-level) selection: dedup whole cells.
        cells = _unique_in_order([c for c in column.values])
        scores = [score_cell(c, stats, mode="avg") for c in cells]
        tokens = _select_cells_by_score(cells, scores, budget)
    elif method == "row_ordered":
        cells = _unique_in_order([c for c in column.values])
        tokens = []
        for cell in cells:
            tokens.extend(tokenize(cell))
        tokens = tokens[:budget]
    else:
        all_tokens = _column_tokens(column)
        unique = _unique_in_order(all_tokens)
        if method == "head":
            tokens = unique[:budget]
        elif method == "alphaHead":
            tokens = sorted(unique)[:budget]
        elif method == "random":
            rng = np.random.default_rng([seed, col_idx])
            k = min(budget, len(unique))
            if k == 0:
                tokens = []
            else:
                picked = rng.choice(len(unique), size=k, replace=False)
                tokens = _emit_in_order(unique, set(int(i) for i in picked))
        elif method == "everyN":
            if not unique:
                tokens = []
            else:
                stride = max(1, math.ceil(len(unique) / budget))
                tokens = unique[::stride][:budget]
        elif method == "uniform":
            counts: dict[str, int] = {}
            for t in all_tokens:
                counts[t] = counts.get(t, 0) + 1
            pos = {t: i for i, t in enumerate(unique)}
            top = sorted(unique, key=lambda t: (-counts[t], pos[t]))[:budget]
            keep = {pos[t] for t in top}
            tokens = _emit_in_order(unique, keep)
        else:  # tfidf_token
            pos = {t: i for i, t in enumerate(unique)}
            top = sorted(unique, key=lambda t: (-stats.idf(t), pos[t]))[:budget]
            keep = {pos[t] for t in top}
            tokens = _emit_in_order(unique, keep)

    return SerializedColumn(
        table_id=table_id,
        col_idx=col_idx,
        tokens=tuple(tokens),
        method=method,
        budget=budget,
    )


def _serialize_table_rowwise(
    table: Table, stats: TokenStats, method: str, budget: int
) -> list[SerializedColumn]:
    # Shared row selection keeps row alignment across the table's columns.
    n_cols = len(table)
    rows = [tuple(col.values[r] for col in table.columns) for r in range(table.n_rows)]
    seen: set[tuple[str, ...]] = set()
    kept: list[int] = []
    for r, row in enumerate(rows):
        if row not in seen:
            seen.add(row)
            kept.append(r)

    if method == "tfidf_row":
        def row_score(r: int) -> float:
            cells = rows[r]
            return sum(score_cell(c, stats, mode="avg") for c in cells) / len(cells)

        ranked = sorted(kept, key=lambda r: (-row_score(r), r))
    else:  # row_ordered
        ranked = kept

    # Take rows until every column has filled its token budget.
    selected: list[int] = []
    filled = [0] * n_cols
    for r in ranked:
        if all(f >= budget for f in filled):
            break
        selected.append(r)
        for j, col in enumerate(table.columns):
            filled[j] += len(tokenize(col.values[r]))
    selected.sort()

    out = []
    for j, col in enumerate(table.columns):
        tokens: list[str] = []
        for r in selected:
            tokens.extend(tokenize(col.values[r]))
        out.append(
            SerializedColumn(
                table_id=table.table_id,
                col_idx=j,
                tokens=tuple(tokens[:budget]),
                method=method,
                budget=budget,
            )
        )
    return out


def serialize_table(
    table: Table,
    stats: TokenStats,
    method: str = "tfidf_entity",
    max_len: int = 256,
    seed: int = 0,
) -> list[SerializedColumn]:
    """Serialize all columns, splitting ``max_len`` uniformly among them."""
    n_cols = len(table)
    if max_len < n_cols:
        raise ValueError(f"max_len {max_len} < number of columns {n_cols}")
    budget = max_len // n_cols
    if method in ("tfidf_row", "row_ordered"):
        return _serialize_table_rowwise(table, stats, method, budget)
    return [
        _serialize_column(col, stats, method, budget, seed, table.table_id, j)
        for j, col in enumerate(table.columns)
    ]
