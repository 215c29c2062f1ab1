"""Column encoders: a small from-scratch transformer (and its config).

The encoder reads a serialized multi-column token sequence and emits one
vector per column, taken at each separator position. A projection head is
attached during contrastive training only; exported embeddings come from
the encoder body.
"""
from __future__ import annotations

import torch
from torch import nn


class SmallTableEncoder(nn.Module):
    """Two-layer transformer over token embeddings with learned positions."""

    def __init__(
        self,
        vocab_size: int,
        dim: int = 64,
        n_layers: int = 2,
        n_heads: int = 4,
        max_seq_len: int = 256,
        projection_dim: int = 64,
    ):
        super().__init__()
        self.dim = dim
        self.max_seq_len = max_seq_len
        self.token_embedding = nn.Embedding(vocab_size, dim, padding_idx=0)
        self.position_embedding = nn.Embedding(max_seq_len, dim)
        layer = nn.TransformerEncoderLayer(
            d_model=dim,
            nhead=n_heads,
            dim_feedforward=4 * dim,
            dropout=0.0,
            batch_first=True,
            norm_first=True,
        )
        # Pre-norm blocks need a closing LayerNorm; without it the residual
        # stream's shared component dominates and all columns collapse into
        # a narrow cosine cone.
        self.encoder = nn.TransformerEncoder(
            layer,
            num_layers=n_layers,
            norm=nn.LayerNorm(dim),
            enable_nested_tensor=False,
        )
        # Zero-initialized context branch: a fresh model embeds a column as
        # its mean token embedding (a content prior standing in for LM
        # pre-training at desk scale); training grows the contextual part.
        self.context = nn.Linear(dim, dim)
        nn.init.zeros_(self.context.weight)
        nn.init.zeros_(self.context.bias)
        self.output_norm = nn.LayerNorm(dim)
        self.projection = nn.Sequential(
            nn.Linear(dim, 4 * dim), nn.ReLU(), nn.Linear(4 * dim, projection_dim)
        )

    def forward(
        self, token_ids: torch.Tensor, padding_mask: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """token_ids: (batch, seq) int64; padding_mask: (batch, seq) bool,
        True where padded. Returns contextual states and the raw (position
        free) token embeddings, both (batch, seq, dim)."""
        seq_len = token_ids.shape[1]
        positions = torch.arange(seq_len, device=token_ids.device)
        content = self.token_embedding(token_ids)
        states = self.encoder(
            content + self.position_embedding(positions),
            src_key_padding_mask=padding_mask,
        )
        return states, content

    def column_embeddings(
        self,
        token_ids: torch.Tensor,
        padding_mask: torch.Tensor,
        sep_positions: list[list[int]],
        project: bool,
    ) -> torch.Tensor:
        """One vector per column, gathered at the separator positions.

        Each separator state is fused with the mean raw embedding of its
        column's token span. The span mean is a content prior in the spirit
        of starting from a pre-trained model: a freshly initialized encoder
        already embeds columns by their token bags, and contrastive training
        shapes the contextual part on top. Returns (total_columns, dim) in
        batch order, column order within each sequence.
        """
        states, content = self.forward(token_ids, padding_mask)
        lengths = (~padding_mask).sum(dim=1)
        gathered = []
        for row, positions in enumerate(sep_positions):
            seq_end = int(lengths[row])
            for col, sep in enumerate(positions):
                span_end = positions[col + 1] if col + 1 < len(positions) else seq_end
                if span_end > sep + 1:
                    span_mean = content[row, sep + 1 : span_end, :].mean(dim=0)
                else:
                    span_mean = torch.zeros(self.dim, device=token_ids.device)
                gathered.append(span_mean + self.context(states[row, sep, :]))
        columns = self.output_norm(torch.stack(gathered, dim=0))
        if project:
            return self.projection(columns)
        return columns
