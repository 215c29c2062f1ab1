"""Deterministic synthetic data lakes with same-group ground truth.

Tables in a group draw their cells from shared per-role vocabulary pools, so
same-group columns are mutually unionable by construction. With zero noise
the group vocabularies are fully disjoint, which guarantees zero cross-group
qualifying edges for the baseline embedder at any reasonable tau.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .evalbench import GroundTruth

_ROLE_KINDS = ("cat", "id", "num")


@dataclass(frozen=True)
class SynthSpec:
    """Defaults keep rows_range well above vocab_size so each column covers
    most of its role vocabulary; same-group column cosine then sits far above
    any sensible edge threshold while cross-group cosine stays near zero."""

    n_groups: int = 10
    tables_per_group: int = 5
    cols_range: tuple[int, int] = (3, 5)
    rows_range: tuple[int, int] = (25, 50)
    vocab_size: int = 12
    noise_rate: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_groups < 1 or self.tables_per_group < 1 or self.vocab_size < 1:
            raise ValueError("counts must be >= 1")
        if self.cols_range[0] < 1 or self.cols_range[0] > self.cols_range[1]:
            raise ValueError("bad cols_range")
        if self.rows_range[0] < 1 or self.rows_range[0] > self.rows_range[1]:
            raise ValueError("bad rows_range")
        if not (0.0 <= self.noise_rate < 1.0):
            raise ValueError("noise_rate must be in [0, 1)")


def _role_vocab(group: int, role: int, kind: str, size: int) -> list[str]:
    # Tokens embed the group id so vocabularies are disjoint across groups.
    if kind == "num":
        base = (group * 97 + role) * 100_000
        return [str(base + i) for i in range(size)]
    prefix = "id" if kind == "id" else "w"
    return [f"{prefix}g{group}r{role}v{i}" for i in range(size)]


def generate(spec: SynthSpec, out_dir: str | Path) -> GroundTruth:
    """Write ``out_dir/tables/*.csv`` plus ``out_dir/ground_truth.csv``.

    Returns the truth map. Byte-identical output for identical specs: a
    single seeded generator drives every choice in a fixed iteration order.
    """
    out_dir = Path(out_dir)
    tables_dir = out_dir / "tables"
    tables_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    max_cols = spec.cols_range[1]

    vocabs: list[list[list[str]]] = []
    for g in range(spec.n_groups):
        roles = []
        for r in range(max_cols):
            kind = _ROLE_KINDS[r % len(_ROLE_KINDS)]
            roles.append(_role_vocab(g, r, kind, spec.vocab_size))
        vocabs.append(roles)

    gt: GroundTruth = {}
    group_tables: list[list[str]] = [[] for _ in range(spec.n_groups)]
    for g in range(spec.n_groups):
        for t in range(spec.tables_per_group):
            table_id = f"g{g:03d}_t{t:02d}"
            group_tables[g].append(table_id)
            n_cols = int(rng.integers(spec.cols_range[0], spec.cols_range[1] + 1))
            n_rows = int(rng.integers(spec.rows_range[0], spec.rows_range[1] + 1))
            headers = [f"{_ROLE_KINDS[r % len(_ROLE_KINDS)]}_{r}" for r in range(n_cols)]
            rows = []
            for _ in range(n_rows):
                row = []
                for r in range(n_cols):
                    vocab = vocabs[g][r]
                    if spec.noise_rate > 0 and rng.random() < spec.noise_rate:
                        other = int(rng.integers(spec.n_groups - 1))
                        if other >= g:
                            other += 1
                        vocab = vocabs[other][r]
                    row.append(vocab[int(rng.integers(len(vocab)))])
                rows.append(row)
            with open(tables_dir / f"{table_id}.csv", "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(headers)
                writer.writerows(rows)

    for members in group_tables:
        for tid in members:
            gt[tid] = {other for other in members if other != tid}

    with open(out_dir / "ground_truth.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["query_table", "data_lake_table"])
        for tid in sorted(gt):
            for other in sorted(gt[tid]):
                writer.writerow([tid, other])
    return gt
