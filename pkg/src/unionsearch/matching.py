"""Table unionability scoring via maximum-weight bipartite matching.

Two tables are compared through a bipartite graph over their columns: an
edge exists whenever the column cosine similarity clears the lower bound
``tau``. The table score is the total weight of the maximum matching. Two
greedy estimates bracket that score:

* upper bound: add edges by descending weight ignoring the one-to-one
  constraint, stopping once either side is fully covered or edges run out;
* lower bound: greedy maximal matching by descending weight (incident edges
  of every picked edge are dropped).

Ties in edge weight are broken by ascending (left_idx, right_idx) so both
bounds are reproducible. Scores are float64 even though vectors are float32.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .embedding import ColumnEmbedding


@dataclass(frozen=True)
class UnionabilityGraph:
    """Thresholded bipartite similarity graph between two tables' columns."""

    left_size: int
    right_size: int
    edges: tuple[tuple[int, int, float], ...]
    tau: float

    def __post_init__(self) -> None:
        seen: set[tuple[int, int]] = set()
        for i, j, w in self.edges:
            if not (0 <= i < self.left_size and 0 <= j < self.right_size):
                raise ValueError(f"edge ({i},{j}) out of range")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i},{j})")
            if not np.isfinite(w):
                raise ValueError(f"non-finite weight on edge ({i},{j})")
            seen.add((i, j))


@dataclass(frozen=True)
class MatchResult:
    score: float
    pairs: tuple[tuple[int, int], ...]


def _normalized_rows(embs: list[ColumnEmbedding]) -> np.ndarray:
    mat = np.vstack([e.vector for e in embs]).astype(np.float64)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0  # zero vectors stay zero: cosine 0 with everything
    return mat / norms


def build_graph(
    s_embs: list[ColumnEmbedding],
    t_embs: list[ColumnEmbedding],
    tau: float,
) -> UnionabilityGraph:
    """Keep exactly the column pairs whose cosine clears ``tau``."""
    if not s_embs or not t_embs:
        raise ValueError("embedding lists must be nonempty")
    dims = {e.vector.shape for e in s_embs} | {e.vector.shape for e in t_embs}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch across embeddings: {dims}")
    sims = _normalized_rows(s_embs) @ _normalized_rows(t_embs).T
    np.clip(sims, -1.0, 1.0, out=sims)
    edges = []
    for i in range(sims.shape[0]):
        for j in range(sims.shape[1]):
            w = float(sims[i, j])
            if w >= tau:
                edges.append((i, j, w))
    return UnionabilityGraph(
        left_size=len(s_embs),
        right_size=len(t_embs),
        edges=tuple(edges),
        tau=tau,
    )


def exact_match(g: UnionabilityGraph) -> MatchResult:
    """Exact maximum-weight bipartite matching over the qualifying edges.

    Solved as a rectangular assignment on a zero-filled dense matrix;
    assignment cells that are not qualifying edges are dropped from the
    reported matching, which is optimal because non-edges contribute 0.
    """
    if not g.edges:
        return MatchResult(score=0.0, pairs=())
    weights = np.zeros((g.left_size, g.right_size), dtype=np.float64)
    edge_set = set()
    for i, j, w in g.edges:
        weights[i, j] = w
        edge_set.add((i, j))
    rows, cols = linear_sum_assignment(weights, maximize=True)
    pairs = []
    score = 0.0
    for i, j in zip(rows, cols):
        if (int(i), int(j)) in edge_set and weights[i, j] > 0.0:
            pairs.append((int(i), int(j)))
            score += float(weights[i, j])
    return MatchResult(score=score, pairs=tuple(pairs))


def _edges_by_weight(g: UnionabilityGraph) -> list[tuple[int, int, float]]:
    return sorted(g.edges, key=lambda e: (-e[2], e[0], e[1]))


def upper_bound(g: UnionabilityGraph) -> float:
    """Greedy bound without the one-to-one constraint; always >= exact."""
    covered_left: set[int] = set()
    covered_right: set[int] = set()
    total = 0.0
    for i, j, w in _edges_by_weight(g):
        total += w
        covered_left.add(i)
        covered_right.add(j)
        if len(covered_left) == g.left_size or len(covered_right) == g.right_size:
            break
    return total


def lower_bound(g: UnionabilityGraph) -> float:
    """Greedy maximal matching by descending weight; always <= exact."""
    used_left: set[int] = set()
    used_right: set[int] = set()
    total = 0.0
    for i, j, w in _edges_by_weight(g):
        if i in used_left or j in used_right:
            continue
        total += w
        used_left.add(i)
        used_right.add(j)
        if len(used_left) == g.left_size or len(used_right) == g.right_size:
            break
    return total
