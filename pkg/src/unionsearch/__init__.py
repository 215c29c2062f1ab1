"""Table union search over CSV data lakes.

Offline: parse tables, serialize columns under a token budget, embed them,
and index the vectors. Online: retrieve candidate tables per query column,
then verify with exact maximum-weight bipartite matching, pruned by greedy
upper/lower bounds.
"""

from .ann import (
    HnswIndex,
    IndexManifest,
    LshIndex,
    build_hnsw,
    build_lsh,
    find_candidates,
    load_index,
    load_manifest,
    save_index,
    write_manifest,
)
from .catalog import CatalogError, Column, LakeCatalog, Table, load_lake, load_table
from .embedding import (
    ColumnEmbedding,
    EmbeddingStore,
    StoreFormatError,
    cosine,
    embed_catalog,
    embed_column_baseline,
    embed_table,
    read_store,
    write_store,
)
from .evalbench import (
    BenchReport,
    ClusterConfig,
    GroundTruth,
    cluster_columns,
    load_ground_truth,
    metrics_at_k,
    purity,
    run_benchmark,
)
from .matching import (
    MatchResult,
    UnionabilityGraph,
    build_graph,
    exact_match,
    lower_bound,
    upper_bound,
)
from .preprocess import (
    SAMPLING_METHODS,
    SerializedColumn,
    TokenStats,
    compute_idf,
    score_cell,
    serialize_column,
    serialize_table,
    tokenize,
)
from .search import (
    QuerySpec,
    SearchResult,
    SearchStats,
    columns_by_table,
    topk_linear,
    topk_search,
)
from .synthlake import SynthSpec, generate

__version__ = "0.1.0"
