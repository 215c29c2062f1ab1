"""Batch contrastive loss over aligned column-embedding pairs.

For embeddings z and a pair (i, j), the single-pair term is

    l(i, j) = -log( exp(sim(z_i, z_j)/t) / sum_{k != i} exp(sim(z_i, z_k)/t) )

with cosine as sim and temperature t. The batch loss averages both
directions over the aligned pairs P:  (1/(2|P|)) * sum [l(i,j) + l(j,i)].
The identity alignment P = {(k, k+N)} reduces this to the plain paired form.
"""
from __future__ import annotations

import torch


def contrastive_loss(
    z: torch.Tensor, pairs: list[tuple[int, int]], temperature: float = 0.07
) -> torch.Tensor:
    """z: (n, d) embeddings; pairs: aligned index pairs into z."""
    if not pairs:
        raise ValueError("pairs must be nonempty")
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    n = z.shape[0]
    normed = torch.nn.functional.normalize(z, dim=1, eps=1e-12)
    logits = (normed @ normed.T) / temperature
    # Mask the k == i term out of every row's denominator.
    eye = torch.eye(n, dtype=torch.bool, device=z.device)
    logits = logits.masked_fill(eye, float("-inf"))
    log_denominator = torch.logsumexp(logits, dim=1)

    idx_i = torch.tensor([i for i, _ in pairs] + [j for _, j in pairs], device=z.device)
    idx_j = torch.tensor([j for _, j in pairs] + [i for i, _ in pairs], device=z.device)
    paired_logits = logits[idx_i, idx_j]
    losses = log_denominator[idx_i] - paired_logits
    return losses.sum() / (2 * len(pairs))
