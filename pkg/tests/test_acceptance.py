"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
complete. Each criterion pins its tolerance and, where stated, its runtime
budget. The suite uses only the baseline embedder; no trained model needed.
"""
import time

import numpy as np
import pytest
from oracles import brute_force_matching_score

from unionsearch.ann import build_hnsw, build_lsh
from unionsearch.catalog import load_lake
from unionsearch.embedding import (
    ColumnEmbedding,
    EmbeddingStore,
    StoreFormatError,
    embed_catalog,
    read_store,
    write_store,
)
from unionsearch.evalbench import (
    ClusterConfig,
    cluster_columns,
    metrics_at_k,
    purity,
    run_benchmark,
)
from unionsearch.matching import (
    UnionabilityGraph,
    build_graph,
    exact_match,
    lower_bound,
    upper_bound,
)
from unionsearch.preprocess import compute_idf
from unionsearch.search import QuerySpec, SearchStats, topk_linear, topk_search
from unionsearch.synthlake import SynthSpec, generate


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# Seven unit vectors realizing the worked example's cosines (frozen from a
# PSD Gram completion; unspecified cross-pair cosines all fall below 0.5).
WORKED_EXAMPLE_VECTORS = {
    "s1": [-1.5459249527852661e-05, 0.2752304805995851, 0.010024836349093428, -0.010073239497633521, -0.30596894102246081, 0.22679114399577086, -0.88260693343459162],
    "s2": [-1.3120365042190316e-05, -0.098688573684222597, 0.0023513674019874325, 0.11065236491146548, 0.81490217636987405, 0.041978894881110243, -0.55873366266502489],
    "s3": [2.9648961677006636e-07, 0.0087938906774057239, -0.12599262970687786, -0.87010233010473426, 0.097230328179979314, -0.40332764894327539, -0.23418695687938529],
    "s4": [2.4524945735888907e-07, 0.0098215336792297787, -0.36986895379105444, 0.37489789588452255, -0.08712656812222383, -0.79484502239968968, -0.28841361558129774],
    "t1": [-2.7015524257616463e-06, -0.33727417211168098, -0.007007039255364958, -0.038818178124697442, -0.43788222312318681, 0.19769941414460876, -0.80861875045450748],
    "t2": [2.4111042335788524e-05, 0.084790647277889375, 0.007507414321875655, 0.055481978421185199, 0.19856153383947675, 0.2134228551011107, -0.95115715660101607],
    "t3": [2.8083269031319432e-07, -0.001937815939400725, 0.40576274576807775, 0.069471344167527496, -0.057627013788787831, -0.85615061944528692, -0.30693943288676973],
}


def test_criterion_1_worked_example_golden():
    start = time.perf_counter()
    edges = [(0, 0, 0.8), (0, 1, 0.85), (1, 1, 0.7), (3, 2, 0.65)]
    g = UnionabilityGraph(left_size=4, right_size=3, edges=tuple(edges), tau=0.5)
    exact = exact_match(g).score
    ub = upper_bound(g)
    lb = lower_bound(g)

    s_embs = [
        ColumnEmbedding("S", i, np.asarray(WORKED_EXAMPLE_VECTORS[f"s{i+1}"], dtype=np.float32))
        for i in range(4)
    ]
    t_embs = [
        ColumnEmbedding("T", j, np.asarray(WORKED_EXAMPLE_VECTORS[f"t{j+1}"], dtype=np.float32))
        for j in range(3)
    ]
    built = build_graph(s_embs, t_embs, tau=0.5)
    built_pairs = {(i, j): w for i, j, w in built.edges}
    excluded = (2, 2) not in built_pairs  # the 0.3-cosine pair
    expected = {(0, 0): 0.8, (0, 1): 0.85, (1, 1): 0.7, (3, 2): 0.65}
    weights_match = set(built_pairs) == set(expected) and all(
        abs(built_pairs[k] - v) < 5e-6 for k, v in expected.items()
    )
    elapsed = time.perf_counter() - start
    ok = (
        abs(exact - 2.15) < 1e-9
        and abs(ub - 3.0) < 1e-9
        and abs(lb - 1.5) < 1e-9
        and excluded
        and weights_match
        and elapsed < 1.0
    )
    report(
        "worked-example golden scores",
        ok,
        f"exact={exact:.10f} ub={ub:.10f} lb={lb:.10f} "
        f"low-similarity edge excluded={excluded} ({elapsed:.3f}s)",
    )


def test_criterion_2_bound_sandwich_and_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(1234)
    tau = 0.5
    n_graphs = 1000
    checked_brute = 0
    for _ in range(n_graphs):
        m = int(rng.integers(1, 11))
        n = int(rng.integers(1, 11))
        density = rng.uniform(0.25, 0.9)
        edges = []
        for i in range(m):
            for j in range(n):
                if rng.random() < density:
                    edges.append((i, j, float(rng.uniform(tau, 1.0))))
        g = UnionabilityGraph(left_size=m, right_size=n, edges=tuple(edges), tau=tau)
        exact = exact_match(g).score
        lb = lower_bound(g)
        ub = upper_bound(g)
        assert lb <= exact + 1e-9, f"LB {lb} > exact {exact}"
        assert exact <= ub + 1e-9, f"exact {exact} > UB {ub}"
        if m <= 7 and n <= 7:
            assert exact == pytest.approx(brute_force_matching_score(g), abs=1e-9)
            checked_brute += 1
    elapsed = time.perf_counter() - start
    ok = elapsed < 30.0 and checked_brute > 0
    report(
        "bound sandwich + brute-force oracle",
        ok,
        f"{n_graphs} graphs, {checked_brute} brute-forced ({elapsed:.1f}s < 30s)",
    )


def test_criterion_3_pruning_equivalence(tmp_path):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    ratios = []
    for lake_idx in range(20):
        n_groups = int(rng.integers(50, 126))  # 200..500 tables at 4 per group
        spec = SynthSpec(
            n_groups=n_groups,
            tables_per_group=4,
            cols_range=(3, 5),
            rows_range=(18, 28),
            vocab_size=10,
            noise_rate=0.0,
            seed=1000 + lake_idx,
        )
        lake_dir = tmp_path / f"lake{lake_idx}"
        generate(spec, lake_dir)
        catalog = load_lake(lake_dir / "tables")
        stats = compute_idf(catalog)
        store = embed_catalog(catalog, stats, method="tfidf_entity", max_len=256, dim=256)
        grouped: dict[str, list] = {}
        for e in store.entries:
            grouped.setdefault(e.table_id, []).append(e)
        for qid in (f"g{n_groups // 2:03d}_t00", f"g{n_groups - 1:03d}_t03"):
            q = grouped[qid]
            lin_stats = SearchStats()
            linear = topk_linear(
                q, store, QuerySpec(k=10), query_table_id=qid, stats=lin_stats
            )
            prn_stats = SearchStats()
            pruned = topk_search(
                q,
                store,
                QuerySpec(k=10, pruning="exact_equiv"),
                query_table_id=qid,
                stats=prn_stats,
            )
            assert [(r.table_id, pytest.approx(r.score, abs=1e-9)) for r in linear] == [
                (r.table_id, pytest.approx(r.score, abs=1e-9)) for r in pruned
            ], f"lake {lake_idx} query {qid}: ranking deviates"
            ratios.append(prn_stats.exact_match_calls / lin_stats.exact_match_calls)
    mean_ratio = float(np.mean(ratios))
    elapsed = time.perf_counter() - start
    ok = mean_ratio <= 0.60 and elapsed < 120.0
    report(
        "pruning equivalence + call savings",
        ok,
        f"20 lakes rank-identical, mean call ratio {mean_ratio:.3f} <= 0.60 "
        f"({elapsed:.1f}s < 120s)",
    )


def test_criterion_4_ann_quality():
    start = time.perf_counter()
    n, dim = 10_000, 64
    rng = np.random.default_rng(42)
    mat = rng.standard_normal((n, dim)).astype(np.float32)
    mat /= np.linalg.norm(mat, axis=1, keepdims=True)
    store = EmbeddingStore(dim=dim)
    for i in range(n):
        store.add(ColumnEmbedding(f"t{i:05d}", 0, mat[i]))

    hnsw = build_hnsw(store, m=16, ef_construction=200, seed=0)
    m64 = mat.astype(np.float64)
    sample = np.random.default_rng(9).choice(n, 300, replace=False)
    recalls = []
    for i in sample:
        approx = {x for x, _ in hnsw.knn(mat[i], 10, ef_search=64)}
        exact = set(np.argsort(-(m64 @ m64[i]))[:10].tolist())
        recalls.append(len(approx & exact) / 10)
    recall = float(np.mean(recalls))

    # simHash bit-agreement law: P(agree) = 1 - theta/pi, sampled at fixed
    # angles; 160 pairs x 128 bits x 5 angles ~ 1e5 bit samples.
    lsh = build_lsh(store, h=128, bands=16, seed=5)
    law_rng = np.random.default_rng(11)
    max_err = 0.0
    for theta in (np.pi / 6, np.pi / 3, np.pi / 2, 2 * np.pi / 3, 5 * np.pi / 6):
        agree = []
        for _ in range(160):
            u = law_rng.standard_normal(dim)
            u /= np.linalg.norm(u)
            w = law_rng.standard_normal(dim)
            w -= (w @ u) * u
            w /= np.linalg.norm(w)
            v = np.cos(theta) * u + np.sin(theta) * w
            bits = lsh.signature(np.vstack([u, v]).astype(np.float32))
            agree.append(float(np.mean(bits[0] == bits[1])))
        max_err = max(max_err, abs(float(np.mean(agree)) - (1 - theta / np.pi)))

    elapsed = time.perf_counter() - start
    ok = recall >= 0.90 and max_err < 0.02 and elapsed < 120.0
    report(
        "ann quality (hnsw recall + simhash law)",
        ok,
        f"recall@10={recall:.3f} >= 0.90, collision-law max err {max_err:.4f} < 0.02 "
        f"({elapsed:.1f}s < 120s)",
    )


def _planted_store(n_tables: int, cols: int, dim: int, seed: int) -> EmbeddingStore:
    rng = np.random.default_rng(seed)
    mat = rng.standard_normal((n_tables * cols, dim)).astype(np.float32)
    mat /= np.linalg.norm(mat, axis=1, keepdims=True)
    store = EmbeddingStore(dim=dim)
    for i in range(n_tables * cols):
        store.add(ColumnEmbedding(f"t{i // cols:05d}", i % cols, mat[i]))
    return store


def test_criterion_5_ann_end_to_end():
    # Part A: a query that is a slightly perturbed copy of a lake table
    # (column cosine ~0.99) must rank that table first via both index types.
    n_tables, cols, dim = 2000, 5, 64
    store = _planted_store(n_tables, cols, dim, seed=77)
    indices = {
        "lsh": build_lsh(store, h=128, bands=16, seed=0),
        "hnsw": build_hnsw(store, m=16, ef_construction=64, seed=0),
    }
    grouped: dict[str, list] = {}
    for e in store.entries:
        grouped.setdefault(e.table_id, []).append(e)
    hits = {"lsh": 0, "hnsw": 0}
    trials = 100
    for trial in range(trials):
        rng = np.random.default_rng(9000 + trial)
        target = f"t{int(rng.integers(n_tables)):05d}"
        q_embs = []
        for e in grouped[target]:
            v = e.vector + 0.07 * rng.standard_normal(dim).astype(np.float32)
            v /= np.linalg.norm(v)
            q_embs.append(ColumnEmbedding("query", e.col_idx, v))
        for mode in ("lsh", "hnsw"):
            results = topk_search(
                q_embs,
                store,
                QuerySpec(k=5, tau=0.5, retrieval=mode, pruning="exact_equiv", top_n=16),
                indices=indices,
            )
            if results and results[0].table_id == target:
                hits[mode] += 1
    part_a = all(hits[m] >= 95 for m in hits)
    report(
        "ann end-to-end planted duplicate",
        part_a,
        f"rank-1 hits of {trials}: lsh={hits['lsh']} hnsw={hits['hnsw']} (>= 95 each)",
    )

    # Part B: HNSW query speedup over an exact scan at 1e5 indexed columns.
    n, dim = 100_000, 256
    rng = np.random.default_rng(3)
    mat = rng.standard_normal((n, dim)).astype(np.float32)
    mat /= np.linalg.norm(mat, axis=1, keepdims=True)
    big = EmbeddingStore(dim=dim)
    for i in range(n):
        big.add(ColumnEmbedding(f"t{i:06d}", 0, mat[i]))
    hnsw = build_hnsw(big, m=16, ef_construction=32, seed=0)
    queries = rng.standard_normal((30, dim)).astype(np.float32)
    queries /= np.linalg.norm(queries, axis=1, keepdims=True)
    k = 10
    t0 = time.perf_counter()
    for q in queries:
        hnsw.knn(q, k, ef_search=64)
    hnsw_mean = (time.perf_counter() - t0) / len(queries)
    scan = big.matrix
    t0 = time.perf_counter()
    for q in queries:
        sims = scan @ q
        np.argpartition(-sims, k)[:k]
    linear_mean = (time.perf_counter() - t0) / len(queries)
    speedup = linear_mean / hnsw_mean
    report(
        "ann end-to-end query speedup at 1e5 columns",
        speedup >= 5.0,
        f"hnsw {hnsw_mean * 1e3:.2f} ms vs linear {linear_mean * 1e3:.2f} ms "
        f"-> {speedup:.1f}x >= 5x",
    )


def test_criterion_6_metrics_golden():
    ap, p, r = metrics_at_k(["A", "X", "B"], {"A", "B"}, 3)
    hand_ok = (
        abs(ap - 5 / 6) < 1e-9 and abs(p - 2 / 3) < 1e-9 and abs(r - 1.0) < 1e-9
    )
    perfect = metrics_at_k(["B", "A"], {"A", "B"}, 2) == (1.0, 1.0, 1.0)
    empty = metrics_at_k(["X", "Y"], {"A"}, 2) == (0.0, 0.0, 0.0)

    aps = []
    for ranked, relevant in ((["a", "x"], {"a"}), (["x", "b"], {"b"}), (["c", "x"], {"c"})):
        aps.append(metrics_at_k(ranked, relevant, 2)[0])
    map_ok = abs(float(np.mean(aps)) - (1.0 + 0.5 + 1.0) / 3) < 1e-9
    ok = hand_ok and perfect and empty and map_ok
    report(
        "metrics golden values",
        ok,
        f"ap={ap:.10f} p={p:.10f} r={r:.10f}, MAP equals mean of APs={map_ok}",
    )


def test_criterion_7_synthetic_benchmark_quality(tmp_path):
    start = time.perf_counter()
    spec = SynthSpec(
        n_groups=50,
        tables_per_group=5,
        cols_range=(3, 5),
        rows_range=(20, 35),
        vocab_size=10,
        noise_rate=0.0,
        seed=12,
    )
    gt = generate(spec, tmp_path)
    catalog = load_lake(tmp_path / "tables")
    stats = compute_idf(catalog)
    store = embed_catalog(catalog, stats, method="tfidf_entity", max_len=256, dim=256)
    grouped: dict[str, list] = {}
    for e in store.entries:
        grouped.setdefault(e.table_id, []).append(e)

    def search_fn(qid: str):
        return topk_search(
            grouped[qid],
            store,
            QuerySpec(k=10, tau=0.5, pruning="exact_equiv"),
            query_table_id=qid,
        )

    bench = run_benchmark(search_fn, sorted(gt), gt, k=10)
    elapsed = time.perf_counter() - start
    ok = bench.map_at_k >= 0.95 and bench.mean_r >= 0.95
    report(
        "synthetic benchmark quality",
        ok,
        f"MAP@10={bench.map_at_k:.4f} R@10={bench.mean_r:.4f} over "
        f"{len(bench.per_query)} queries ({elapsed:.1f}s)",
    )


def test_criterion_8_clustering():
    rng = np.random.default_rng(15)
    dim = 32
    centers = rng.standard_normal((5, dim)).astype(np.float32)
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    store = EmbeddingStore(dim=dim)
    labels = {}
    planted: list[set] = [set() for _ in range(5)]
    for c in range(5):
        for i in range(12):
            v = centers[c] + (0.2 / np.sqrt(dim)) * rng.standard_normal(dim).astype(
                np.float32
            )
            v /= np.linalg.norm(v)
            key = (f"c{c}_t{i:02d}", 0)
            store.add(ColumnEmbedding(key[0], 0, v))
            labels[key] = f"type{c}"
            planted[c].add(key)
    clusters = cluster_columns(store, ClusterConfig(theta=0.6))
    recovered = sorted(map(sorted, clusters)) == sorted(map(sorted, planted))
    pure = purity(clusters, labels)

    hand = purity(
        [{("a", 0), ("b", 0), ("c", 0)}, {("d", 0), ("e", 0)}],
        {("a", 0): "a", ("b", 0): "a", ("c", 0): "b", ("d", 0): "c", ("e", 0): "c"},
    )
    ok = recovered and pure == 1.0 and abs(hand - 0.8) < 1e-12
    report(
        "column clustering",
        ok,
        f"planted 5-cluster recovered={recovered}, purity={pure}, hand example={hand}",
    )


def test_criterion_9_store_format(tmp_path):
    rng = np.random.default_rng(77)
    store = EmbeddingStore(dim=16)
    for i in range(20):
        store.add(ColumnEmbedding(f"tbl{i:02d}", i % 4, rng.standard_normal(16).astype(np.float32)))
    p1 = tmp_path / "a.smbe"
    p2 = tmp_path / "b.smbe"
    write_store(store, p1)
    write_store(read_store(p1), p2)
    byte_identical = p1.read_bytes() == p2.read_bytes()

    bad = tmp_path / "bad.smbe"
    bad.write_bytes(b"XMBE" + p1.read_bytes()[4:])
    try:
        read_store(bad)
        rejected = False
    except StoreFormatError:
        rejected = True
    ok = byte_identical and rejected
    report(
        "embedding store format",
        ok,
        f"round trip byte-identical={byte_identical}, wrong magic rejected={rejected}",
    )
