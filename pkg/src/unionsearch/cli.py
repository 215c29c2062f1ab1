"""Command-line surface: embed | index | query | bench | cluster | synth.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Flag values beat
config-file values beat defaults, and the effective configuration is echoed
into every output for reproducibility.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import ann, evalbench, search, synthlake
from .catalog import load_lake, load_table
from .embedding import (
    EmbeddingStore,
    embed_catalog,
    embed_table,
    read_store,
    write_store,
)
from .preprocess import SAMPLING_METHODS, TokenStats, compute_idf

logger = logging.getLogger("unionsearch")


def _meta_path(store_path: str | Path) -> Path:
    return Path(str(store_path) + ".meta.json")


def _write_meta(store_path: Path, config: dict, stats: TokenStats) -> None:
    payload = {"config": config, "stats": {"m_columns": stats.m_columns, "df": stats.df}}
    _meta_path(store_path).write_text(json.dumps(payload), encoding="utf-8")


def _read_meta(store_path: Path) -> tuple[dict, TokenStats] | None:
    """Sidecar with the embedding config and lake token statistics.

    Stores produced by other embedders (e.g. a trained encoder) carry no
    sidecar; queries against them must already be in the store.
    """
    path = _meta_path(store_path)
    if not path.exists():
        return None
    payload = json.loads(path.read_text(encoding="utf-8"))
    stats = TokenStats(
        m_columns=payload["stats"]["m_columns"],
        df={k: int(v) for k, v in payload["stats"]["df"].items()},
    )
    return payload["config"], stats


def _emit(obj: dict) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_synth(args: argparse.Namespace) -> int:
    spec = synthlake.SynthSpec(
        n_groups=args.groups,
        tables_per_group=args.tables_per_group,
        cols_range=(args.cols[0], args.cols[1]),
        rows_range=(args.rows[0], args.rows[1]),
        vocab_size=args.vocab_size,
        noise_rate=args.noise,
        seed=args.seed,
    )
    gt = synthlake.generate(spec, args.out)
    _emit(
        {
            "out": str(args.out),
            "tables": sum(1 for _ in (Path(args.out) / "tables").glob("*.csv")),
            "queries_with_truth": len(gt),
            "config": {
                "groups": spec.n_groups,
                "tables_per_group": spec.tables_per_group,
                "cols": list(spec.cols_range),
                "rows": list(spec.rows_range),
                "vocab_size": spec.vocab_size,
                "noise": spec.noise_rate,
                "seed": spec.seed,
            },
        }
    )
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    catalog = load_lake(args.lake, workers=args.workers)
    if len(catalog) == 0:
        logger.error("no parseable tables under %s", args.lake)
        return 1
    stats = compute_idf(catalog)
    store = embed_catalog(
        catalog, stats, method=args.method, max_len=args.max_len, dim=args.dim, seed=args.seed
    )
    write_store(store, args.out)
    config = {
        "lake": str(args.lake),
        "method": args.method,
        "dim": args.dim,
        "max_len": args.max_len,
        "seed": args.seed,
    }
    _write_meta(Path(args.out), config, stats)
    _emit(
        {
            "store": str(args.out),
            "tables": len(catalog),
            "columns": len(store),
            "skipped_files": catalog.n_skipped,
            "config": config,
        }
    )
    return 0


def cmd_index(args: argparse.Namespace) -> int:
    store = read_store(args.store)
    index_path = args.index_path or str(args.out) + f".{args.type}"
    if args.type == "lsh":
        index = ann.build_lsh(store, h=args.lsh_h, bands=args.lsh_bands, seed=args.seed)
        params = {"h": args.lsh_h, "bands": args.lsh_bands}
    else:
        index = ann.build_hnsw(
            store, m=args.hnsw_m, ef_construction=args.ef_construction, seed=args.seed
        )
        params = {"m": args.hnsw_m, "ef_construction": args.ef_construction}
    ann.save_index(index, index_path)
    manifest = ann.IndexManifest(
        index_type=args.type,
        params=params,
        seed=args.seed,
        store_path=str(args.store),
        index_path=str(index_path),
    )
    ann.write_manifest(manifest, args.out)
    _emit({"manifest": str(args.out), "index_path": str(index_path), "config": params | {"type": args.type, "seed": args.seed}})
    return 0


def _load_search_inputs(
    args: argparse.Namespace,
) -> tuple[EmbeddingStore, tuple[dict, TokenStats] | None, dict[str, ann.LshIndex | ann.HnswIndex]]:
    indices: dict[str, ann.LshIndex | ann.HnswIndex] = {}
    if args.manifest:
        manifest = ann.load_manifest(args.manifest)
        store_path = Path(manifest.store_path)
        indices[manifest.index_type] = ann.load_index(manifest.index_path)
    else:
        store_path = Path(args.store)
    store = read_store(store_path)
    return store, _read_meta(store_path), indices


def _query_embeddings(
    query_id: str,
    query_path: Path | None,
    store: EmbeddingStore,
    meta: tuple[dict, TokenStats] | None,
):
    # In-store tables are served from the store itself: that is by
    # definition the same preprocessing config as the rest of the lake.
    grouped = search.columns_by_table(store)
    if query_id in grouped:
        return grouped[query_id]
    if query_path is None:
        raise FileNotFoundError(f"query {query_id!r} not in store and no CSV given")
    if meta is None:
        raise FileNotFoundError(
            f"cannot embed {query_path}: store has no .meta.json sidecar; "
            "only in-store table ids can be queried"
        )
    config, stats = meta
    table = load_table(query_path, table_id=query_id)
    return embed_table(
        table,
        stats,
        method=config["method"],
        max_len=config["max_len"],
        dim=config["dim"],
        seed=config["seed"],
    )


def cmd_query(args: argparse.Namespace) -> int:
    store, meta, indices = _load_search_inputs(args)
    spec = search.QuerySpec(
        k=args.k, tau=args.tau, retrieval=args.mode, pruning=args.pruning, top_n=args.top_n
    )
    outputs = []
    for query_csv in args.query:
        path = Path(query_csv)
        query_id = path.stem
        embs = _query_embeddings(query_id, path, store, meta)
        results = search.topk_search(
            embs, store, spec, indices=indices or None, query_table_id=query_id
        )
        outputs.append(
            {
                "query": query_id,
                "results": [
                    {"table_id": r.table_id, "score": r.score, "score_kind": r.score_kind}
                    for r in results
                ],
            }
        )
    source = str(args.manifest if args.manifest else args.store)
    _emit({"queries": outputs, "config": _spec_dict(spec) | {"source": source}})
    return 0


def _spec_dict(spec: search.QuerySpec) -> dict:
    return {
        "k": spec.k,
        "tau": spec.tau,
        "retrieval": spec.retrieval,
        "pruning": spec.pruning,
        "top_n": spec.top_n,
    }


def cmd_bench(args: argparse.Namespace) -> int:
    store, meta, indices = _load_search_inputs(args)
    gt = evalbench.load_ground_truth(args.gt, known_ids=set(store.table_ids()))
    spec = search.QuerySpec(
        k=args.k, tau=args.tau, retrieval=args.mode, pruning=args.pruning, top_n=args.top_n
    )
    queries_dir = Path(args.queries_dir) if args.queries_dir else None

    def search_fn(query_id: str):
        path = None
        if queries_dir is not None:
            candidate = queries_dir / f"{query_id}.csv"
            path = candidate if candidate.exists() else None
        embs = _query_embeddings(query_id, path, store, meta)
        return search.topk_search(
            embs, store, spec, indices=indices or None, query_table_id=query_id
        )

    queries = args.queries or sorted(gt)
    report = evalbench.run_benchmark(
        search_fn,
        queries,
        gt,
        k=args.k,
        repeats=args.repeats,
        workers=args.workers,
        config=_spec_dict(spec) | {"repeats": args.repeats},
    )
    if args.json:
        _emit(report.to_dict())
    else:
        print(f"queries: {len(report.per_query)}  k={report.k}")
        print(f"MAP@k  : {report.map_at_k:.4f}")
        print(f"P@k    : {report.mean_p:.4f}")
        print(f"R@k    : {report.mean_r:.4f}")
        print(f"time   : mean {report.mean_seconds * 1e3:.2f} ms  p95 {report.p95_seconds * 1e3:.2f} ms")
    return 0


def cmd_cluster(args: argparse.Namespace) -> int:
    store = read_store(args.store)
    cfg = evalbench.ClusterConfig(theta=args.theta)
    clusters = evalbench.cluster_columns(store, cfg)
    payload: dict = {
        "n_clusters": len(clusters),
        "clusters": [sorted([f"{tid}:{cidx}" for tid, cidx in c]) for c in clusters],
        "config": {"theta": args.theta},
    }
    if args.labels:
        labels: dict[tuple[str, int], str] = {}
        with open(args.labels, newline="", encoding="utf-8") as f:
            import csv as _csv

            reader = _csv.reader(f)
            next(reader, None)
            for row in reader:
                labels[(row[0], int(row[1]))] = row[2]
        payload["purity"] = evalbench.purity(clusters, labels)
    _emit(payload)
    return 0


def _positive_int(value: str) -> int:
    parsed = int(value)
    if parsed < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return parsed


def _unit_interval(value: str) -> float:
    parsed = float(value)
    if not (0.0 < parsed <= 1.0):
        raise argparse.ArgumentTypeError(f"must be in (0, 1], got {value}")
    return parsed


def _existing_path(value: str) -> Path:
    path = Path(value)
    if not path.exists():
        raise argparse.ArgumentTypeError(f"path does not exist: {value}")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unionsearch",
        description="Table union search over CSV data lakes.",
    )
    parser.add_argument("--config", type=_existing_path, help="JSON file with default option values")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic lake with ground truth")
    p.add_argument("--out", required=True)
    p.add_argument("--groups", type=_positive_int, default=10)
    p.add_argument("--tables-per-group", type=_positive_int, default=5)
    p.add_argument("--cols", nargs=2, type=int, default=[3, 5], metavar=("MIN", "MAX"))
    p.add_argument("--rows", nargs=2, type=int, default=[10, 30], metavar=("MIN", "MAX"))
    p.add_argument("--vocab-size", type=_positive_int, default=40)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("embed", help="embed every lake column into an SMBE store")
    p.add_argument("--lake", type=_existing_path, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=SAMPLING_METHODS, default="tfidf_entity")
    p.add_argument("--dim", type=_positive_int, default=256)
    p.add_argument("--max-len", type=_positive_int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("index", help="build an ANN index over a store")
    p.add_argument("--store", type=_existing_path, required=True)
    p.add_argument("--type", choices=("lsh", "hnsw"), required=True)
    p.add_argument("--out", required=True, help="manifest JSON path")
    p.add_argument("--index-path", default=None)
    p.add_argument("--lsh-h", type=_positive_int, default=128)
    p.add_argument("--lsh-bands", type=_positive_int, default=16)
    p.add_argument("--hnsw-m", type=_positive_int, default=16)
    p.add_argument("--ef-construction", type=_positive_int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_index)

    def add_search_args(p: argparse.ArgumentParser) -> None:
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--manifest", type=_existing_path)
        src.add_argument("--store", type=_existing_path)
        p.add_argument("--k", type=_positive_int, default=10)
        p.add_argument("--tau", type=_unit_interval, default=0.5)
        p.add_argument("--mode", choices=("linear", "lsh", "hnsw"), default="linear")
        p.add_argument("--pruning", choices=("off", "fast", "exact_equiv"), default="off")
        p.add_argument("--top-n", type=_positive_int, default=64)

    p = sub.add_parser("query", help="top-k unionable tables for query CSVs")
    add_search_args(p)
    p.add_argument("--query", nargs="+", required=True, help="query CSV file(s)")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="run a benchmark against ground truth")
    add_search_args(p)
    p.add_argument("--gt", type=_existing_path, required=True)
    p.add_argument("--queries", nargs="*", default=None, help="query table ids (default: all in gt)")
    p.add_argument("--queries-dir", default=None, help="directory with query CSVs not in the lake")
    p.add_argument("--repeats", type=_positive_int, default=1)
    p.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("cluster", help="connected-component column clustering")
    p.add_argument("--store", type=_existing_path, required=True)
    p.add_argument("--theta", type=_unit_interval, default=0.6)
    p.add_argument("--labels", type=_existing_path, default=None, help="CSV table_id,col_idx,label")
    p.set_defaults(func=cmd_cluster)

    parser._command_parsers = dict(sub.choices)  # for config-file defaults
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, _ = parser.parse_known_args(argv)
    if args.config:
        defaults = json.loads(Path(args.config).read_text(encoding="utf-8"))
        # Flags beat config values beat built-in defaults: push config values
        # into each subparser that knows the option, then re-parse.
        for command_parser in parser._command_parsers.values():
            known = {action.dest for action in command_parser._actions}
            command_parser.set_defaults(
                **{key: val for key, val in defaults.items() if key in known}
            )
        args = parser.parse_args(argv)
    else:
        args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, OSError) as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
