"""Semantics-preserving table augmentations with column alignment.

Every operator returns the augmented table plus the survivor mapping from
original column index to augmented column index; cell- and row-level
operators keep the identity mapping, column-level operators record which
columns survived and where they moved.
"""
from __future__ import annotations

import numpy as np

from .tables import Table, from_rows

AUGMENT_OPS = (
    "drop_cell",
    "drop_token",
    "swap_token",
    "repl_token",
    "sample_row",
    "sample_row_ordered",
    "shuffle_row",
    "shuffle_col",
    "drop_col",
    "drop_nan_col",
    "drop_num_col",
)

ColumnMap = dict[int, int]


def _rebuild(table: Table, rows: list[list[str]]) -> Table:
    return from_rows(table.table_id, list(table.headers), rows)


def _identity(table: Table) -> ColumnMap:
    return {i: i for i in range(table.n_cols)}


def _is_numeric_column(values: tuple[str, ...]) -> bool:
    filled = [v for v in values if v.strip()]
    if not filled:
        return False
    numeric = 0
    for v in filled:
        try:
            float(v.replace(",", ""))
            numeric += 1
        except ValueError:
            pass
    return numeric / len(filled) >= 0.8


def _mostly_empty(values: tuple[str, ...]) -> bool:
    if not values:
        return True
    empty = sum(1 for v in values if not v.strip())
    return empty / len(values) > 0.5


def _keep_columns(table: Table, keep: list[int]) -> tuple[Table, ColumnMap]:
    headers = [table.headers[j] for j in keep]
    columns = tuple(table.columns[j] for j in keep)
    aug = Table(table_id=table.table_id, headers=tuple(headers), columns=columns)
    return aug, {orig: new for new, orig in enumerate(keep)}


def augment(table: Table, op: str, seed: int, sample_frac: float = 0.5) -> tuple[Table, ColumnMap]:
    """Apply one operator, or a '+'-separated chain applied left to right
    with the survivor mappings composed. Never produces an empty table
    (degenerate draws become no-ops)."""
    if "+" in op:
        mapping = _identity(table)
        current = table
        for step, part in enumerate(op.split("+")):
            current, step_map = augment(current, part, seed * 31 + step, sample_frac)
            mapping = {
                orig: step_map[mid] for orig, mid in mapping.items() if mid in step_map
            }
        return current, mapping
    if op not in AUGMENT_OPS:
        raise ValueError(f"unknown augmentation op: {op!r}")
    rng = np.random.default_rng(seed)
    rows = [list(r) for r in table.rows()]

    if op == "drop_cell":
        if rows:
            r = int(rng.integers(len(rows)))
            c = int(rng.integers(table.n_cols))
            rows[r][c] = ""
        return _rebuild(table, rows), _identity(table)

    if op in ("drop_token", "swap_token", "repl_token"):
        if rows:
            c = int(rng.integers(table.n_cols))
            cells_with_tokens = [
                r for r in range(len(rows)) if len(rows[r][c].split()) >= 1 and rows[r][c].strip()
            ]
            if cells_with_tokens:
                r = int(cells_with_tokens[int(rng.integers(len(cells_with_tokens)))])
                tokens = rows[r][c].split()
                if op == "drop_token":
                    tokens.pop(int(rng.integers(len(tokens))))
                elif op == "swap_token" and len(tokens) >= 2:
                    i, j = rng.choice(len(tokens), size=2, replace=False)
                    tokens[i], tokens[j] = tokens[j], tokens[i]
                elif op == "repl_token":
                    donor_rows = [x for x in cells_with_tokens if x != r]
                    if donor_rows:
                        donor = rows[int(donor_rows[int(rng.integers(len(donor_rows)))])][c]
                        replacement = donor.split()
                        if replacement:
                            tokens[int(rng.integers(len(tokens)))] = replacement[
                                int(rng.integers(len(replacement)))
                            ]
                rows[r][c] = " ".join(tokens)
        return _rebuild(table, rows), _identity(table)

    if op in ("sample_row", "sample_row_ordered"):
        if len(rows) >= 2:
            keep = max(1, round(sample_frac * len(rows)))
            picked = rng.choice(len(rows), size=keep, replace=False)
            if op == "sample_row_ordered":
                picked = np.sort(picked)
            rows = [rows[int(i)] for i in picked]
        return _rebuild(table, rows), _identity(table)

    if op == "shuffle_row":
        order = rng.permutation(len(rows))
        rows = [rows[int(i)] for i in order]
        return _rebuild(table, rows), _identity(table)

    if op == "shuffle_col":
        order = [int(i) for i in rng.permutation(table.n_cols)]
        aug, _ = _keep_columns(table, order)
        return aug, {orig: new for new, orig in enumerate(order)}

    if op == "drop_col":
        if table.n_cols <= 1:
            return table, _identity(table)
        victim = int(rng.integers(table.n_cols))
        keep = [j for j in range(table.n_cols) if j != victim]
        return _keep_columns(table, keep)

    if op == "drop_nan_col":
        keep = [j for j in range(table.n_cols) if not _mostly_empty(table.columns[j])]
        if not keep or len(keep) == table.n_cols:
            return table, _identity(table)
        return _keep_columns(table, keep)

    # drop_num_col
    numeric = [j for j in range(table.n_cols) if _is_numeric_column(table.columns[j])]
    if not numeric or len(numeric) == table.n_cols == 1 or table.n_cols <= 1:
        return table, _identity(table)
    victim = int(numeric[int(rng.integers(len(numeric)))])
    keep = [j for j in range(table.n_cols) if j != victim]
    if not keep:
        return table, _identity(table)
    return _keep_columns(table, keep)
