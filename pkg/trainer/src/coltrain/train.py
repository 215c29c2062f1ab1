"""Self-supervised pre-training over a lake of tables.

Each step samples a batch of whole tables, makes a verbatim copy and an
augmented view, encodes all columns of both views in one forward pass, and
pulls each original column toward its augmented survivor while pushing it
away from every other column in the batch.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .augment import augment
from .loss import contrastive_loss
from .model import SmallTableEncoder
from .serialize import (
    SerializedTable,
    TokenStats,
    Vocab,
    build_vocab,
    compute_stats,
    serialize_multi_column,
)
from .tables import Table

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainerConfig:
    batch_size: int = 8
    learning_rate: float = 5e-5
    n_epoch: int = 10
    temperature: float = 0.07
    aug_op: str = "drop_col"
    max_seq_len: int = 256
    encoder_kind: str = "small-transformer"
    encoder_dim: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.temperature <= 1.0):
            raise ValueError("temperature must be in (0, 1]")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2")


@dataclass
class AlignedBatch:
    """Original and augmented views plus the aligned column-index pairs.

    Pair indices address the concatenated embedding block: original columns
    first (in table order), then augmented columns.
    """

    ori: list[SerializedTable]
    aug: list[SerializedTable]
    pairs: list[tuple[int, int]]


@dataclass
class EncoderModel:
    """Trained encoder with everything needed for deterministic inference."""

    network: SmallTableEncoder
    vocab: Vocab
    stats: TokenStats
    max_seq_len: int
    dim: int
    training_log: list[dict] = field(default_factory=list)


def _batchify(
    serialized: list[SerializedTable], vocab: Vocab, max_seq_len: int
) -> tuple[torch.Tensor, torch.Tensor, list[list[int]]]:
    width = max(len(s.tokens) for s in serialized)
    width = min(width, max_seq_len)
    ids = torch.zeros((len(serialized), width), dtype=torch.int64)
    pad = torch.ones((len(serialized), width), dtype=torch.bool)
    positions = []
    for row, s in enumerate(serialized):
        encoded = vocab.encode(s.tokens)[:width]
        ids[row, : len(encoded)] = torch.tensor(encoded, dtype=torch.int64)
        pad[row, : len(encoded)] = False
        positions.append([p for p in s.sep_positions if p < width])
    return ids, pad, positions


def build_aligned_batch(
    tables: list[Table],
    stats: TokenStats,
    cfg: TrainerConfig,
    seed: int,
) -> AlignedBatch:
    ori = [serialize_multi_column(t, stats, cfg.max_seq_len) for t in tables]
    aug_serialized = []
    pairs: list[tuple[int, int]] = []
    total_ori = sum(t.n_cols for t in tables)
    ori_offset = 0
    aug_offset = 0
    for i, table in enumerate(tables):
        view, mapping = augment(table, cfg.aug_op, seed=seed * 65_537 + i)
        aug_serialized.append(serialize_multi_column(view, stats, cfg.max_seq_len))
        for orig_col, new_col in mapping.items():
            pairs.append((ori_offset + orig_col, total_ori + aug_offset + new_col))
        ori_offset += table.n_cols
        aug_offset += view.n_cols
    return AlignedBatch(ori=ori, aug=aug_serialized, pairs=pairs)


def pretrain(tables: list[Table], cfg: TrainerConfig) -> EncoderModel:
    """Train the small transformer encoder; returns it with its vocab/stats.

    Deterministic for a fixed config: batch composition, augmentation draws
    and parameter init all derive from cfg.seed.
    """
    if len(tables) < 2:
        raise ValueError("need at least 2 tables to pre-train")
    if cfg.encoder_kind != "small-transformer":
        raise ValueError(
            f"encoder kind {cfg.encoder_kind!r} is not trainable at desk scale; "
            "only 'small-transformer' is built in"
        )
    torch.manual_seed(cfg.seed)
    stats = compute_stats(tables)
    vocab = build_vocab(tables)
    network = SmallTableEncoder(
        vocab_size=vocab.size,
        dim=cfg.encoder_dim,
        max_seq_len=cfg.max_seq_len,
        projection_dim=cfg.encoder_dim,
    )
    optimizer = torch.optim.Adam(network.parameters(), lr=cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)
    log: list[dict] = []
    step = 0
    network.train()
    for epoch in range(cfg.n_epoch):
        order = rng.permutation(len(tables))
        epoch_losses = []
        for start in range(0, len(tables), cfg.batch_size):
            batch_tables = [tables[int(i)] for i in order[start : start + cfg.batch_size]]
            if len(batch_tables) < 2:
                continue
            batch = build_aligned_batch(batch_tables, stats, cfg, seed=cfg.seed + step)
            ids, pad, positions = _batchify(batch.ori + batch.aug, vocab, cfg.max_seq_len)
            embeddings = network.column_embeddings(ids, pad, positions, project=True)
            loss = contrastive_loss(embeddings, batch.pairs, cfg.temperature)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.detach()))
            step += 1
        mean_loss = float(np.mean(epoch_losses)) if epoch_losses else float("nan")
        log.append({"epoch": epoch + 1, "mean_loss": mean_loss})
        logger.info("epoch %d: mean loss %.4f", epoch + 1, mean_loss)
    network.eval()
    return EncoderModel(
        network=network,
        vocab=vocab,
        stats=stats,
        max_seq_len=cfg.max_seq_len,
        dim=cfg.encoder_dim,
        training_log=log,
    )


def write_training_log(model: EncoderModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.training_log, indent=2) + "\n", encoding="utf-8")


@torch.no_grad()
def encode_table(model: EncoderModel, table: Table) -> np.ndarray:
    """(n_cols, dim) float32 L2-normalized column embeddings, eval mode."""
    serialized = serialize_multi_column(table, model.stats, model.max_seq_len)
    ids, pad, positions = _batchify([serialized], model.vocab, model.max_seq_len)
    model.network.eval()
    columns = model.network.column_embeddings(ids, pad, positions, project=False)
    out = columns.numpy().astype(np.float32)
    norms = np.linalg.norm(out, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return out / norms
