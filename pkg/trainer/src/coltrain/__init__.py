"""Contrastive pre-training of multi-column table encoders."""

from .augment import AUGMENT_OPS, augment
from .export import export_embeddings, read_smbe, write_smbe
from .loss import contrastive_loss
from .model import SmallTableEncoder
from .serialize import (
    SerializedTable,
    TokenStats,
    Vocab,
    build_vocab,
    compute_stats,
    serialize_multi_column,
    tokenize,
)
from .tables import Table, load_lake, load_table
from .train import (
    AlignedBatch,
    EncoderModel,
    TrainerConfig,
    build_aligned_batch,
    encode_table,
    pretrain,
    write_training_log,
)

__version__ = "0.1.0"
