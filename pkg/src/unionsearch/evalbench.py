"""Benchmark harness: ranked-retrieval metrics, timing, column clustering.

AP@k is normalized by min(k, |relevant|) so a perfect run scores 1.0 even
when the ground truth holds more than k tables.
"""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .ann import HnswIndex, build_hnsw
from .embedding import EmbeddingStore
from .search import SearchResult

logger = logging.getLogger(__name__)

GroundTruth = dict[str, set[str]]

ColumnKey = tuple[str, int]

# Above this many columns, exact pairwise clustering gives way to
# ANN-generated candidate edges.
EXACT_CLUSTER_CUTOFF = 100_000


def load_ground_truth(path: str | Path, known_ids: set[str] | None = None) -> GroundTruth:
    """Read the `query_table,data_lake_table` CSV.

    Unresolvable ids are warned about but kept, so recall denominators match
    the file.
    """
    gt: GroundTruth = {}
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            return gt
        for row in reader:
            if len(row) < 2:
                continue
            query_id, relevant_id = row[0], row[1]
            if known_ids is not None:
                for tid in (query_id, relevant_id):
                    if tid not in known_ids:
                        logger.warning("ground truth id %r not in lake", tid)
            gt.setdefault(query_id, set()).add(relevant_id)
    return gt


def metrics_at_k(
    ranked: list[str], relevant: set[str], k: int
) -> tuple[float, float, float]:
    """(AP@k, P@k, R@k) for one ranked list."""
    if k < 1:
        raise ValueError("k must be >= 1")
    top = ranked[:k]
    hits = 0
    precision_sum = 0.0
    for rank, tid in enumerate(top, start=1):
        if tid in relevant:
            hits += 1
            precision_sum += hits / rank
    p = hits / k
    r = hits / len(relevant) if relevant else 0.0
    ap = precision_sum / min(k, len(relevant)) if relevant else 0.0
    return ap, p, r


@dataclass
class QueryReport:
    query_id: str
    ap: float
    p: float
    r: float
    seconds: float


@dataclass
class BenchReport:
    k: int
    per_query: list[QueryReport]
    map_at_k: float
    mean_p: float
    mean_r: float
    mean_seconds: float
    p95_seconds: float
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "map_at_k": self.map_at_k,
            "mean_p_at_k": self.mean_p,
            "mean_r_at_k": self.mean_r,
            "mean_query_seconds": self.mean_seconds,
            "p95_query_seconds": self.p95_seconds,
            "config": self.config,
            "per_query": [
                {
                    "query": q.query_id,
                    "ap": q.ap,
                    "p": q.p,
                    "r": q.r,
                    "seconds": q.seconds,
                }
                for q in self.per_query
            ],
        }


def run_benchmark(
    search_fn: Callable[[str], list[SearchResult]],
    queries: list[str],
    gt: GroundTruth,
    k: int,
    repeats: int = 1,
    workers: int = 1,
    config: dict | None = None,
) -> BenchReport:
    """Run every query, average timing over ``repeats``, aggregate metrics.

    Queries without ground truth are skipped with a warning. Timing covers
    the search call only (index building happens before this function).
    """
    usable = []
    for qid in queries:
        if qid not in gt:
            logger.warning("query %r has no ground truth, skipped", qid)
            continue
        usable.append(qid)

    def run_one(qid: str) -> QueryReport:
        times = []
        results: list[SearchResult] = []
        for _ in range(max(1, repeats)):
            start = time.perf_counter()
            results = search_fn(qid)
            times.append(time.perf_counter() - start)
        ranked = [r.table_id for r in results]
        ap, p, r = metrics_at_k(ranked, gt[qid], k)
        return QueryReport(qid, ap, p, r, float(np.mean(times)))

    if workers > 1 and len(usable) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_one, usable))
    else:
        reports = [run_one(qid) for qid in usable]

    if reports:
        map_k = float(np.mean([q.ap for q in reports]))
        mean_p = float(np.mean([q.p for q in reports]))
        mean_r = float(np.mean([q.r for q in reports]))
        times = [q.seconds for q in reports]
        mean_s = float(np.mean(times))
        p95_s = float(np.percentile(times, 95))
    else:
        map_k = mean_p = mean_r = mean_s = p95_s = 0.0
    return BenchReport(
        k=k,
        per_query=reports,
        map_at_k=map_k,
        mean_p=mean_p,
        mean_r=mean_r,
        mean_seconds=mean_s,
        p95_seconds=p95_s,
        config=config or {},
    )


@dataclass(frozen=True)
class ClusterConfig:
    theta: float = 0.6
    exact_cutoff: int = EXACT_CLUSTER_CUTOFF
    ann_top_n: int = 64

    def __post_init__(self) -> None:
        if not (0.0 < self.theta <= 1.0):
            raise ValueError("theta must be in (0, 1]")


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def cluster_columns(
    store: EmbeddingStore,
    cfg: ClusterConfig = ClusterConfig(),
    index: HnswIndex | None = None,
) -> list[set[ColumnKey]]:
    """Connected components of the theta-similarity graph over all columns.

    Exact blockwise pair enumeration up to ``cfg.exact_cutoff`` columns;
    larger stores fall back to ANN-generated edges (approximate)."""
    n = len(store)
    if n == 0:
        raise ValueError("store is empty")
    mat = store.matrix.astype(np.float64)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    mat = mat / norms
    uf = _UnionFind(n)

    if n <= cfg.exact_cutoff:
        block = max(1, min(n, 2_000_000 // max(n, 1) + 1))
        for start in range(0, n, block):
            stop = min(n, start + block)
            sims = mat[start:stop] @ mat.T
            rows, cols = np.nonzero(sims >= cfg.theta)
            for i, j in zip(rows.tolist(), cols.tolist()):
                gi = start + i
                if gi != j:
                    uf.union(gi, j)
    else:
        if index is None:
            index = build_hnsw(store, m=16, ef_construction=100, seed=0)
        for i in range(n):
            for j, sim in index.knn(mat[i].astype(np.float32), cfg.ann_top_n):
                if i != j and sim >= cfg.theta:
                    uf.union(i, j)

    groups: dict[int, set[ColumnKey]] = {}
    for i, entry in enumerate(store.entries):
        groups.setdefault(uf.find(i), set()).add(entry.key)
    return sorted(groups.values(), key=lambda s: sorted(s)[0])


def purity(clusters: list[set[ColumnKey]], labels: dict[ColumnKey, str]) -> float:
    """Fraction of columns carrying the majority label of their cluster."""
    total = 0
    agree = 0
    for cluster in clusters:
        counts: dict[str, int] = {}
        for key in cluster:
            counts[labels[key]] = counts.get(labels[key], 0) + 1
        total += len(cluster)
        agree += max(counts.values())
    return agree / total if total else 0.0
