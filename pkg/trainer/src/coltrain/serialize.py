"""Multi-column table serialization for the encoder.

A table becomes one token sequence ``<s> col0-tokens <s> col1-tokens ...``
with the separator marking the start of each column; the encoder output at
each separator position is that column's embedding. The per-column token
budget splits the sequence budget uniformly, one slot per column reserved
for its separator.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .tables import Table

SEP_TOKEN = "<s>"
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(cell: str) -> list[str]:
    return _TOKEN_RE.findall(cell.lower())


@dataclass
class TokenStats:
    """Column-level document frequencies over the training lake."""

    m_columns: int
    df: dict[str, int]

    def idf(self, token: str) -> float:
        return math.log(self.m_columns) / self.df.get(token, 1)


def compute_stats(tables: list[Table]) -> TokenStats:
    df: dict[str, int] = {}
    m = 0
    for table in tables:
        for column in table.columns:
            m += 1
            seen: set[str] = set()
            for cell in column:
                seen.update(tokenize(cell))
            for token in seen:
                df[token] = df.get(token, 0) + 1
    return TokenStats(m_columns=max(m, 1), df=df)


def _column_tokens(column: tuple[str, ...], stats: TokenStats, budget: int) -> list[str]:
    # Cell-level selection by mean token IDF, unique cells, original order.
    seen: set[str] = set()
    cells = []
    for cell in column:
        if cell not in seen:
            seen.add(cell)
            cells.append(cell)

    def cell_score(cell: str) -> float:
        tokens = tokenize(cell)
        if not tokens:
            return 0.0
        return sum(stats.idf(t) for t in tokens) / len(tokens)

    order = sorted(range(len(cells)), key=lambda i: (-cell_score(cells[i]), i))
    chosen = []
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


@dataclass(frozen=True)
class SerializedTable:
    table_id: str
    tokens: tuple[str, ...]  # includes one separator per column
    sep_positions: tuple[int, ...]  # one per column, in column order


def serialize_multi_column(
    table: Table, stats: TokenStats, max_seq_len: int = 256
) -> SerializedTable:
    """Concatenate per-column token runs behind their separators."""
    n_cols = table.n_cols
    if max_seq_len < 2 * n_cols:
        raise ValueError(
            f"max_seq_len {max_seq_len} too small for {n_cols} columns"
        )
    budget = max_seq_len // n_cols - 1  # one slot per column for the separator
    tokens: list[str] = []
    positions: list[int] = []
    for column in table.columns:
        positions.append(len(tokens))
        tokens.append(SEP_TOKEN)
        tokens.extend(_column_tokens(column, stats, budget))
    return SerializedTable(
        table_id=table.table_id, tokens=tuple(tokens), sep_positions=tuple(positions)
    )


@dataclass
class Vocab:
    token_to_id: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.token_to_id)

    def encode(self, tokens: tuple[str, ...]) -> list[int]:
        unk = self.token_to_id[UNK_TOKEN]
        return [self.token_to_id.get(t, unk) for t in tokens]


def build_vocab(tables: list[Table]) -> Vocab:
    mapping = {PAD_TOKEN: 0, SEP_TOKEN: 1, UNK_TOKEN: 2}
    seen: set[str] = set()
    for table in tables:
        for column in table.columns:
            for cell in column:
                seen.update(tokenize(cell))
    for token in sorted(seen):
        mapping[token] = len(mapping)
    return Vocab(token_to_id=mapping)
