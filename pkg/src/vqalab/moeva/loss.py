"""InfoNCE contrastive loss on unit-normalized embeddings.

Per anchor: -log exp(q.k+ / tau) / (exp(q.k+ / tau) + sum exp(q.k- / tau)),
averaged over the batch. Analytic gradients are returned for the anchor,
positive, and every negative embedding.
"""

from __future__ import annotations

import numpy as np

from ..errors import NonPositiveTemperature


def infonce_loss(q: np.ndarray, k_pos: np.ndarray, k_negs: list, tau: float):
    """Mean InfoNCE loss and embedding gradients.

    q, k_pos: (B, D); k_negs: per-anchor (M_i, D) arrays. Returns
    (loss, dq, dk_pos, dk_negs) with gradients of the mean loss.
    """
    if tau <= 0:
        raise NonPositiveTemperature(f"tau must be > 0, got {tau}")
    q = np.asarray(q, dtype=np.float64)
    k_pos = np.asarray(k_pos, dtype=np.float64)
    batch = q.shape[0]
    losses = np.empty(batch)
    dq = np.empty_like(q)
    dk_pos = np.empty_like(k_pos)
    dk_negs = []
    for i in range(batch):
        negs = np.atleast_2d(np.asarray(k_negs[i], dtype=np.float64))
        keys = np.vstack([k_pos[i][None, :], negs])
        logits = keys @ q[i] / tau
        shift = logits.max()
        expl = np.exp(logits - shift)
        probs = expl / expl.sum()
        losses[i] = -(logits[0] - shift) + np.log(expl.sum())
        # d loss_i / dq = (sum_j p_j k_j - k+) / tau
        dq[i] = (probs @ keys - keys[0]) / tau / batch
        dk_pos[i] = (probs[0] - 1.0) * q[i] / tau / batch
        dk_negs.append(probs[1:, None] * q[i][None, :] / tau / batch)
    return float(losses.mean()), dq, dk_pos, dk_negs
