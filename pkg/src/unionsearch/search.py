"""Top-k table union search: linear scan and filter-and-verify with bounds.

Ranking is always the stable total order (score descending, table_id
ascending), and a query table present in the lake is excluded from its own
results. Three pruning modes are offered:

* ``off`` - verify every candidate with the exact matcher.
* ``exact_equiv`` - verify the first k candidates, then skip a candidate
  only when its greedy upper bound cannot beat the current k-th entry.
  Output is guaranteed rank-identical to the linear scan over the same
  candidate set.
* ``fast`` - the literal filter-and-verify loop, where a candidate whose
  greedy lower bound beats the heap floor is admitted carrying that lower
  bound (labeled ``lower_bound``); rankings may deviate from exact.
"""
from __future__ import annotations

from dataclasses import dataclass

from .ann import HnswIndex, LshIndex, find_candidates
from .embedding import ColumnEmbedding, EmbeddingStore
from .matching import build_graph, exact_match, lower_bound, upper_bound

# Scores within this slack of the heap floor are always verified, so float
# summation order can never flip an upper-bound discard.
_BOUND_EPS = 1e-9


@dataclass(frozen=True)
class QuerySpec:
    k: int
    tau: float = 0.5
    retrieval: str = "linear"  # linear | lsh | hnsw
    pruning: str = "off"  # off | fast | exact_equiv
    top_n: int = 64

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not (0.0 < self.tau <= 1.0):
            raise ValueError("tau must be in (0, 1]")
        if self.retrieval not in ("linear", "lsh", "hnsw"):
            raise ValueError(f"unknown retrieval mode {self.retrieval!r}")
        if self.pruning not in ("off", "fast", "exact_equiv"):
            raise ValueError(f"unknown pruning mode {self.pruning!r}")


@dataclass(frozen=True)
class SearchResult:
    table_id: str
    score: float
    score_kind: str  # "exact" | "lower_bound"


@dataclass
class SearchStats:
    """Instrumentation for pruning-effectiveness checks."""

    exact_match_calls: int = 0
    bound_evals: int = 0
    candidates: int = 0


def columns_by_table(store: EmbeddingStore) -> dict[str, list[ColumnEmbedding]]:
    grouped: dict[str, list[ColumnEmbedding]] = {}
    for entry in store.entries:
        grouped.setdefault(entry.table_id, []).append(entry)
    return grouped


def _ranked(results: list[tuple[str, float, str]], k: int) -> list[SearchResult]:
    results.sort(key=lambda r: (-r[1], r[0]))
    return [SearchResult(tid, score, kind) for tid, score, kind in results[:k]]


def topk_linear(
    query_embs: list[ColumnEmbedding],
    store: EmbeddingStore,
    spec: QuerySpec,
    query_table_id: str | None = None,
    stats: SearchStats | None = None,
) -> list[SearchResult]:
    """Exact top-k by scoring every lake table."""
    grouped = columns_by_table(store)
    scored: list[tuple[str, float, str]] = []
    for table_id in sorted(grouped):
        if table_id == query_table_id:
            continue
        g = build_graph(query_embs, grouped[table_id], spec.tau)
        result = exact_match(g)
        if stats is not None:
            stats.exact_match_calls += 1
        scored.append((table_id, result.score, "exact"))
    return _ranked(scored, spec.k)


def _gather_candidates(
    query_embs: list[ColumnEmbedding],
    store: EmbeddingStore,
    spec: QuerySpec,
    indices: dict[str, LshIndex | HnswIndex] | None,
) -> list[str]:
    if spec.retrieval == "linear":
        return sorted(columns_by_table(store))
    if not indices or spec.retrieval not in indices:
        raise ValueError(f"no {spec.retrieval!r} index supplied")
    index = indices[spec.retrieval]
    found: set[str] = set()
    for emb in query_embs:
        found |= find_candidates(index, store, emb, spec.tau, top_n=spec.top_n)
    return sorted(found)


def topk_search(
    query_embs: list[ColumnEmbedding],
    store: EmbeddingStore,
    spec: QuerySpec,
    indices: dict[str, LshIndex | HnswIndex] | None = None,
    query_table_id: str | None = None,
    stats: SearchStats | None = None,
) -> list[SearchResult]:
    """Filter-and-verify top-k search.

    Candidates are gathered per query column (or all tables for linear
    retrieval), iterated in lexicographic table_id order, and verified or
    pruned per ``spec.pruning``.
    """
    if stats is None:
        stats = SearchStats()
    grouped = columns_by_table(store)
    candidates = [
        tid for tid in _gather_candidates(query_embs, store, spec, indices)
        if tid != query_table_id
    ]
    stats.candidates = len(candidates)

    if spec.pruning == "off":
        scored: list[tuple[str, float, str]] = []
        for tid in candidates:
            g = build_graph(query_embs, grouped[tid], spec.tau)
            result = exact_match(g)
            stats.exact_match_calls += 1
            scored.append((tid, result.score, "exact"))
        return _ranked(scored, spec.k)

    # top: (table_id, score, kind) kept sorted best-first, length <= k.
    top: list[tuple[str, float, str]] = []

    def worst() -> tuple[str, float, str]:
        return top[-1]

    def push(entry: tuple[str, float, str]) -> None:
        top.append(entry)
        top.sort(key=lambda r: (-r[1], r[0]))
        del top[spec.k :]

    for tid in candidates:
        g = build_graph(query_embs, grouped[tid], spec.tau)
        if len(top) < spec.k:
            result = exact_match(g)
            stats.exact_match_calls += 1
            push((tid, result.score, "exact"))
            continue
        floor = worst()[1]
        if spec.pruning == "fast":
            stats.bound_evals += 1
            lb = lower_bound(g)
            if lb > floor:
                # Literal shortcut: admit with the lower bound, unverified.
                top.pop()
                push((tid, lb, "lower_bound"))
            elif upper_bound(g) <= floor:
                continue
            else:
                result = exact_match(g)
                stats.exact_match_calls += 1
                if result.score > floor:
                    top.pop()
                    push((tid, result.score, "exact"))
        else:  # exact_equiv
            stats.bound_evals += 1
            ub = upper_bound(g)
            # Discard when the bound cannot beat the current k-th entry.
            # Scores within the float slack are verified, except the exact
            # 0.0 tie (an empty edge set sums to exactly 0.0, so the
            # table_id tiebreak is decidable without verification).
            worst_tid = worst()[0]
            if ub < floor - _BOUND_EPS or (
                ub == 0.0 and floor == 0.0 and tid > worst_tid
            ):
                continue
            result = exact_match(g)
            stats.exact_match_calls += 1
            push((tid, result.score, "exact"))

    return _ranked(top, spec.k)
