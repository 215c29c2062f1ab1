"""Compiled layer-0 search kernel for the navigable-graph index.

Layer 0 holds every vector and absorbs nearly all distance computations, so
its best-first search runs as a numba kernel over flat arrays: vectors in a
(capacity, dim) float32 matrix, adjacency in a (capacity, max_degree) int32
matrix with a parallel degree array, and an epoch-stamped visited mark.

Heap entries order by (distance, node id); the result arrays come back
sorted ascending the same way the pure-Python upper-layer search sorts.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True, inline="always")
def _cosine_dist(vectors, node, q):
    row = vectors[node]
    acc = np.float32(0.0)
    for i in range(q.shape[0]):
        acc += row[i] * q[i]
    return 1.0 - np.float64(acc)


@njit(cache=True, inline="always")
def _sift_up_min(hd, hn, pos):
    while pos > 0:
        parent = (pos - 1) >> 1
        if hd[pos] < hd[parent] or (hd[pos] == hd[parent] and hn[pos] < hn[parent]):
            hd[pos], hd[parent] = hd[parent], hd[pos]
            hn[pos], hn[parent] = hn[parent], hn[pos]
            pos = parent
        else:
            break


@njit(cache=True, inline="always")
def _sift_down_min(hd, hn, size):
    pos = 0
    while True:
        left = 2 * pos + 1
        if left >= size:
            break
        smallest = left
        right = left + 1
        if right < size and (
            hd[right] < hd[left] or (hd[right] == hd[left] and hn[right] < hn[left])
        ):
            smallest = right
        if hd[smallest] < hd[pos] or (hd[smallest] == hd[pos] and hn[smallest] < hn[pos]):
            hd[pos], hd[smallest] = hd[smallest], hd[pos]
            hn[pos], hn[smallest] = hn[smallest], hn[pos]
            pos = smallest
        else:
            break


@njit(cache=True, inline="always")
def _sift_up_max(hd, hn, pos):
    # Max-heap on distance, ties prefer the smaller node id at the root.
    while pos > 0:
        parent = (pos - 1) >> 1
        if hd[pos] > hd[parent] or (hd[pos] == hd[parent] and hn[pos] < hn[parent]):
            hd[pos], hd[parent] = hd[parent], hd[pos]
            hn[pos], hn[parent] = hn[parent], hn[pos]
            pos = parent
        else:
            break


@njit(cache=True, inline="always")
def _sift_down_max(hd, hn, size):
    pos = 0
    while True:
        left = 2 * pos + 1
        if left >= size:
            break
        largest = left
        right = left + 1
        if right < size and (
            hd[right] > hd[left] or (hd[right] == hd[left] and hn[right] < hn[left])
        ):
            largest = right
        if hd[largest] > hd[pos] or (hd[largest] == hd[pos] and hn[largest] < hn[pos]):
            hd[pos], hd[largest] = hd[largest], hd[pos]
            hn[pos], hn[largest] = hn[largest], hn[pos]
            pos = largest
        else:
            break


@njit(cache=True, fastmath=True)
def search_layer0(vectors, adj, deg, q, entry_points, ef, mark, epoch):
    """Best-first search over the layer-0 graph; returns (dists, nodes)
    sorted ascending by (distance, node)."""
    cand_cap = 1024
    cand_d = np.empty(cand_cap, np.float64)
    cand_n = np.empty(cand_cap, np.int32)
    cand_size = 0
    best_d = np.empty(ef, np.float64)
    best_n = np.empty(ef, np.int32)
    best_size = 0

    for i in range(entry_points.shape[0]):
        node = entry_points[i]
        if mark[node] == epoch:
            continue
        mark[node] = epoch
        d = _cosine_dist(vectors, node, q)
        cand_d[cand_size] = d
        cand_n[cand_size] = node
        cand_size += 1
        _sift_up_min(cand_d, cand_n, cand_size - 1)
        if best_size < ef:
            best_d[best_size] = d
            best_n[best_size] = node
            best_size += 1
            _sift_up_max(best_d, best_n, best_size - 1)
        elif d < best_d[0]:
            best_d[0] = d
            best_n[0] = node
            _sift_down_max(best_d, best_n, best_size)

    while cand_size > 0:
        d = cand_d[0]
        node = cand_n[0]
        cand_size -= 1
        cand_d[0] = cand_d[cand_size]
        cand_n[0] = cand_n[cand_size]
        _sift_down_min(cand_d, cand_n, cand_size)

        if best_size >= ef and d > best_d[0]:
            break

        row = adj[node]
        degree = deg[node]
        for t in range(degree):
            nb = row[t]
            if mark[nb] == epoch:
                continue
            mark[nb] = epoch
            dnb = _cosine_dist(vectors, nb, q)
            if best_size < ef:
                best_d[best_size] = dnb
                best_n[best_size] = nb
                best_size += 1
                _sift_up_max(best_d, best_n, best_size - 1)
            elif dnb < best_d[0]:
                best_d[0] = dnb
                best_n[0] = nb
                _sift_down_max(best_d, best_n, best_size)
            else:
                continue
            if cand_size == cand_cap:
                new_cap = cand_cap * 2
                nd = np.empty(new_cap, np.float64)
                nn = np.empty(new_cap, np.int32)
                nd[:cand_cap] = cand_d
                nn[:cand_cap] = cand_n
                cand_d = nd
                cand_n = nn
                cand_cap = new_cap
            cand_d[cand_size] = dnb
            cand_n[cand_size] = nb
            cand_size += 1
            _sift_up_min(cand_d, cand_n, cand_size - 1)

    out_d = np.empty(best_size, np.float64)
    out_n = np.empty(best_size, np.int32)
    for i in range(best_size - 1, -1, -1):
        out_d[i] = best_d[0]
        out_n[i] = best_n[0]
        best_size -= 1
        best_d[0] = best_d[best_size]
        best_n[0] = best_n[best_size]
        _sift_down_max(best_d, best_n, best_size)
    return out_d, out_n


@njit(cache=True, fastmath=True)
def drop_farthest0(vectors, adj, deg, node):
    """Remove the farthest neighbor from a layer-0 adjacency row in place."""
    degree = deg[node]
    row = adj[node]
    base = vectors[node]
    worst = -2.0
    worst_at = 0
    for t in range(degree):
        other = vectors[row[t]]
        acc = np.float32(0.0)
        for i in range(base.shape[0]):
            acc += other[i] * base[i]
        d = 1.0 - np.float64(acc)
        if d > worst:
            worst = d
            worst_at = t
    row[worst_at] = row[degree - 1]
    deg[node] = degree - 1
