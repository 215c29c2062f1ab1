"""Approximate candidate retrieval over column embeddings.

Two index families answer "which tables contain a column similar to this
query column":

* :class:`LshIndex` - random-hyperplane signature bits (cosine LSH), banded
  into buckets; bucket co-occupants are candidates.
* :class:`HnswIndex` - a layered navigable proximity graph under cosine
  distance ``1 - cos``, searched greedily from a top-layer entry point.

Both are approximate: candidates are always re-checked against the true
cosine, so the index can only lose candidates (false negatives), never
corrupt scores. Builds are deterministic given the seed and store order.
"""
from __future__ import annotations

import heapq
import json
import math
import pickle
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _hnsw_kernel as _kernel
from .embedding import ColumnEmbedding, EmbeddingStore

CandidateSet = set[str]


def _normalized_matrix(store: EmbeddingStore) -> np.ndarray:
    mat = store.matrix.astype(np.float32, copy=True)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return mat / norms


def _normalize_query(vector: np.ndarray, dim: int) -> np.ndarray:
    if vector.shape != (dim,):
        raise ValueError(f"query has shape {vector.shape}, index dim is {dim}")
    q = vector.astype(np.float32)
    norm = np.linalg.norm(q)
    return q / norm if norm > 0 else q


class LshIndex:
    """simHash LSH: signature bit i is sign(dot(v, hyperplane_i)).

    The H signature bits are split into ``bands`` groups of ``rows_per_band``
    bits; a column lands in one bucket per band, keyed by that band's bits.
    """

    def __init__(self, hyperplanes: np.ndarray, bands: int, table_ids: list[str], seed: int):
        self.hyperplanes = hyperplanes  # (h, dim) unit rows
        self.h = hyperplanes.shape[0]
        self.dim = hyperplanes.shape[1]
        self.bands = bands
        self.rows_per_band = self.h // bands
        self.table_ids = table_ids
        self.seed = seed
        self.buckets: dict[tuple[int, bytes], list[int]] = {}

    def signature(self, vectors: np.ndarray) -> np.ndarray:
        """(n, h) boolean signature matrix."""
        return (vectors @ self.hyperplanes.T) > 0

    def _band_keys(self, bits: np.ndarray) -> list[bytes]:
        r = self.rows_per_band
        return [
            np.packbits(bits[b * r : (b + 1) * r]).tobytes()
            for b in range(self.bands)
        ]

    def insert_all(self, vectors: np.ndarray) -> None:
        bits = self.signature(vectors)
        for row in range(bits.shape[0]):
            for b, key in enumerate(self._band_keys(bits[row])):
                self.buckets.setdefault((b, key), []).append(row)

    def query(self, vector: np.ndarray) -> list[int]:
        """Union of bucket co-occupants across all bands, sorted entry offsets."""
        q = _normalize_query(vector, self.dim)
        bits = self.signature(q[None, :])[0]
        found: set[int] = set()
        for b, key in enumerate(self._band_keys(bits)):
            found.update(self.buckets.get((b, key), ()))
        return sorted(found)


def build_lsh(
    store: EmbeddingStore, h: int = 128, bands: int = 16, seed: int = 0
) -> LshIndex:
    if len(store) == 0:
        raise ValueError("store is empty")
    if h % bands != 0:
        raise ValueError(f"bands {bands} must divide h {h}")
    rng = np.random.default_rng(seed)
    planes = rng.standard_normal((h, store.dim)).astype(np.float32)
    planes /= np.linalg.norm(planes, axis=1, keepdims=True)
    index = LshIndex(planes, bands, store.table_ids(), seed)
    index.insert_all(_normalized_matrix(store))
    return index


class HnswIndex:
    """Hierarchical navigable small-world graph under cosine distance.

    Every node lives at layer 0; a node's top layer is drawn from the
    geometric law floor(-ln(U) * mL) with mL = 1/ln(M). Neighbor lists hold
    at most M nodes on upper layers and 2M at layer 0. Insertion order is
    the store's entry order, so builds are reproducible for a given seed.

    Layer 0 carries essentially all distance work and runs through the
    compiled kernel in ``_hnsw_kernel``; the sparse upper layers stay in
    plain Python.
    """

    def __init__(self, dim: int, m: int, ef_construction: int, table_ids: list[str], seed: int):
        self.dim = dim
        self.m = m
        self.m0 = 2 * m
        self.ef_construction = ef_construction
        self.table_ids = table_ids
        self.seed = seed
        self.ml = 1.0 / math.log(m)
        self._rng = np.random.default_rng(seed)
        self._vectors = np.zeros((0, dim), dtype=np.float32)
        self._n = 0
        self._levels: list[int] = []
        self._adj0 = np.zeros((0, self.m0 + 1), dtype=np.int32)  # one spare slot
        self._deg0 = np.zeros(0, dtype=np.int32)
        self._upper: dict[int, list[list[int]]] = {}  # node -> layers 1..level
        self._entry = -1
        self._max_level = -1
        self._mark = np.zeros(0, dtype=np.int64)
        self._epoch = 0

    def __len__(self) -> int:
        return self._n

    def neighbors(self, node: int, layer: int) -> list[int]:
        if layer == 0:
            return self._adj0[node, : self._deg0[node]].tolist()
        return list(self._upper[node][layer - 1])

    # -- upper-layer search (pure Python; upper layers hold ~1/M of nodes) --

    def _upper_search(
        self, q: np.ndarray, entry_points: list[int], layer: int, ef: int
    ) -> list[tuple[float, int]]:
        """Best-first search at one upper layer; (dist, node) ascending."""
        self._epoch += 1
        epoch = self._epoch
        mark = self._mark
        vectors = self._vectors
        for ep in entry_points:
            mark[ep] = epoch
        dists = (1.0 - vectors[entry_points] @ q).tolist()
        candidates = list(zip(dists, entry_points))
        heapq.heapify(candidates)
        best = [(-d, n) for d, n in zip(dists, entry_points)]
        heapq.heapify(best)
        while len(best) > ef:
            heapq.heappop(best)

        while candidates:
            dist, node = heapq.heappop(candidates)
            if dist > -best[0][0] and len(best) >= ef:
                break
            fresh = [n for n in self._upper[node][layer - 1] if mark[n] != epoch]
            if not fresh:
                continue
            for n in fresh:
                mark[n] = epoch
            for d, n in zip((1.0 - vectors[fresh] @ q).tolist(), fresh):
                if len(best) < ef:
                    heapq.heappush(candidates, (d, n))
                    heapq.heappush(best, (-d, n))
                elif d < -best[0][0]:
                    heapq.heappush(candidates, (d, n))
                    heapq.heappushpop(best, (-d, n))
        return sorted((-nd, n) for nd, n in best)

    def _layer0_search(self, q: np.ndarray, entry_points: list[int], ef: int):
        self._epoch += 1
        return _kernel.search_layer0(
            self._vectors,
            self._adj0,
            self._deg0,
            q,
            np.asarray(entry_points, dtype=np.int32),
            ef,
            self._mark,
            self._epoch,
        )

    def _select_neighbors(self, dists, nodes, m: int) -> list[int]:
        """Diversity-aware selection: keep a candidate only if it is closer
        to the query than to every already-selected neighbor, then fill any
        remaining slots with the nearest discarded candidates.

        One pairwise distance matrix plus a running minimum over selected
        columns keeps this O(c^2) in numpy rather than c small matmuls.
        """
        count = len(nodes)
        if count <= m:
            return [int(n) for n in nodes]
        ids = [int(n) for n in nodes]
        block = self._vectors[ids]
        pairwise = 1.0 - block @ block.T
        min_to_selected = np.full(count, np.inf)
        selected: list[int] = []
        chosen: set[int] = set()
        for pos in range(count):
            if len(selected) == m:
                break
            if not selected or dists[pos] < min_to_selected[pos]:
                selected.append(ids[pos])
                chosen.add(pos)
                np.minimum(min_to_selected, pairwise[pos], out=min_to_selected)
        if len(selected) < m:
            for pos in range(count):
                if len(selected) == m:
                    break
                if pos not in chosen:
                    selected.append(ids[pos])
        return selected

    # -- construction ---------------------------------------------------------

    def _grow(self, needed: int) -> None:
        cap = self._vectors.shape[0]
        if needed <= cap:
            return
        new_cap = max(needed, int(cap * 1.5) + 8)
        grown = np.zeros((new_cap, self.dim), dtype=np.float32)
        grown[: self._n] = self._vectors[: self._n]
        self._vectors = grown
        adj = np.zeros((new_cap, self.m0 + 1), dtype=np.int32)
        adj[: self._n] = self._adj0[: self._n]
        self._adj0 = adj
        deg = np.zeros(new_cap, dtype=np.int32)
        deg[: self._n] = self._deg0[: self._n]
        self._deg0 = deg
        mark = np.zeros(new_cap, dtype=np.int64)
        mark[: self._n] = self._mark[: self._n]
        self._mark = mark

    def insert(self, vector: np.ndarray) -> int:
        node = self._n
        self._grow(node + 1)
        q = _normalize_query(vector, self.dim)
        self._vectors[node] = q
        self._n += 1
        level = int(-math.log(self._rng.uniform(1e-12, 1.0)) * self.ml)
        self._levels.append(level)
        if level >= 1:
            self._upper[node] = [[] for _ in range(level)]

        if self._entry < 0:
            self._entry = node
            self._max_level = level
            return node

        eps = [self._entry]
        for layer in range(self._max_level, max(level, 0), -1):
            eps = [self._upper_search(q, eps, layer, 1)[0][1]]

        for layer in range(min(level, self._max_level), 0, -1):
            cands = self._upper_search(q, eps, layer, self.ef_construction)
            neighbors = self._select_neighbors(
                [d for d, _ in cands], [n for _, n in cands], self.m
            )
            self._upper[node][layer - 1] = list(neighbors)
            for nb in neighbors:
                nb_list = self._upper[nb][layer - 1]
                nb_list.append(node)
                if len(nb_list) > self.m:
                    # Keep the nearest; measured indistinguishable from
                    # heuristic re-selection here and much cheaper.
                    ds = 1.0 - self._vectors[nb_list] @ self._vectors[nb]
                    nb_list.pop(int(np.argmax(ds)))
            eps = [n for _, n in cands]

        dists, nodes = self._layer0_search(q, eps, self.ef_construction)
        neighbors = self._select_neighbors(dists, nodes, self.m)
        self._adj0[node, : len(neighbors)] = neighbors
        self._deg0[node] = len(neighbors)
        for nb in neighbors:
            # The row has one spare slot so the new link is appended first
            # and the farthest of the m0+1 entries (possibly the new one)
            # is dropped, matching append-then-prune semantics.
            degree = self._deg0[nb]
            self._adj0[nb, degree] = node
            self._deg0[nb] = degree + 1
            if degree + 1 > self.m0:
                _kernel.drop_farthest0(self._vectors, self._adj0, self._deg0, nb)

        if level > self._max_level:
            self._entry = node
            self._max_level = level
        return node

    # -- queries --------------------------------------------------------------

    def knn(self, vector: np.ndarray, k: int, ef_search: int = 64) -> list[tuple[int, float]]:
        """Approximate top-k entry offsets with their cosine similarities."""
        if self._n == 0:
            return []
        q = _normalize_query(vector, self.dim)
        ef = max(ef_search, k)
        eps = [self._entry]
        for layer in range(self._max_level, 0, -1):
            eps = [self._upper_search(q, eps, layer, 1)[0][1]]
        dists, nodes = self._layer0_search(q, eps, ef)
        return [(int(n), 1.0 - float(d)) for d, n in zip(dists[:k], nodes[:k])]


def build_hnsw(
    store: EmbeddingStore, m: int = 16, ef_construction: int = 200, seed: int = 0
) -> HnswIndex:
    if len(store) == 0:
        raise ValueError("store is empty")
    index = HnswIndex(store.dim, m, ef_construction, store.table_ids(), seed)
    normalized = _normalized_matrix(store)
    for row in range(normalized.shape[0]):
        index.insert(normalized[row])
    return index


def find_candidates(
    index: LshIndex | HnswIndex,
    store: EmbeddingStore,
    q: ColumnEmbedding,
    tau: float,
    top_n: int = 64,
    ef_search: int | None = None,
) -> CandidateSet:
    """Tables containing a column whose *true* cosine with ``q`` is >= tau.

    The index proposes entry offsets; each is re-checked against the exact
    cosine from the store, so approximation can only drop candidates.
    """
    if q.vector.shape != (store.dim,):
        raise ValueError(f"query dim {q.vector.shape} vs store dim {store.dim}")
    if isinstance(index, LshIndex):
        offsets = index.query(q.vector)
    else:
        if ef_search is None:
            ef_search = max(64, 4 * top_n)
        offsets = [n for n, _ in index.knn(q.vector, top_n, ef_search=ef_search)]
    if not offsets:
        return set()
    qv = q.vector.astype(np.float64)
    qn = np.linalg.norm(qv)
    if qn == 0.0:
        return set()
    qv /= qn
    block = store.matrix[offsets].astype(np.float64)
    norms = np.linalg.norm(block, axis=1)
    norms[norms == 0.0] = 1.0
    sims = (block / norms[:, None]) @ qv
    tids = index.table_ids
    return {tids[o] for o, s in zip(offsets, sims) if s >= tau}


# -- persistence ----------------------------------------------------------


def save_index(index: LshIndex | HnswIndex, path: str | Path) -> None:
    with open(path, "wb") as f:
        pickle.dump(index, f, protocol=4)


def load_index(path: str | Path) -> LshIndex | HnswIndex:
    with open(path, "rb") as f:
        index = pickle.load(f)
    if not isinstance(index, (LshIndex, HnswIndex)):
        raise TypeError(f"{path} does not contain a supported index")
    return index


@dataclass(frozen=True)
class IndexManifest:
    index_type: str  # "lsh" | "hnsw"
    params: dict
    seed: int
    store_path: str
    index_path: str


def write_manifest(manifest: IndexManifest, path: str | Path) -> None:
    payload = {
        "index_type": manifest.index_type,
        "params": manifest.params,
        "seed": manifest.seed,
        "store_path": manifest.store_path,
        "index_path": manifest.index_path,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_manifest(path: str | Path) -> IndexManifest:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return IndexManifest(
        index_type=payload["index_type"],
        params=payload["params"],
        seed=payload["seed"],
        store_path=payload["store_path"],
        index_path=payload["index_path"],
    )
