"""Forward-only reference kernels for the attention variants used for
model diversity: cumulative-average context (AAN-style) and
talking-heads attention, plus the standard scaled dot-product baseline.

Dense numpy, no masking, no gradients; these exist so the formulas are
executable and testable, not for training.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FfnParams:
    """Position-wise two-layer feed-forward: relu(x W1 + b1) W2 + b2.

    use_activation=False bypasses the rectifier so an exact identity
    configuration is constructible for testing.
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    use_activation: bool = True

    def __post_init__(self):
        if self.w1.shape[1] != self.w2.shape[0]:
            raise ValueError("W1/W2 inner dimensions do not match")
        if self.b1.shape != (self.w1.shape[1],):
            raise ValueError("b1 shape mismatch")
        if self.b2.shape != (self.w2.shape[1],):
            raise ValueError("b2 shape mismatch")

    @classmethod
    def identity(cls, d: int) -> "FfnParams":
        return cls(
            w1=np.eye(d),
            b1=np.zeros(d),
            w2=np.eye(d),
            b2=np.zeros(d),
            use_activation=False,
        )

    def apply(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.w1.shape[0]:
            raise ValueError(
                f"input width {x.shape[-1]} != W1 rows {self.w1.shape[0]}"
            )
        h = x @ self.w1 + self.b1
        if self.use_activation:
            h = np.maximum(h, 0.0)
        return h @ self.w2 + self.b2


def aan_context(y: np.ndarray, ffn: FfnParams) -> np.ndarray:
    """Causal cumulative average of the input rows, then the FFN.

    Row i of the output depends only on rows 0..i of y.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[0] < 1:
        raise ValueError("y must be a (t, d) matrix with t >= 1")
    t = y.shape[0]
    cum_mean = np.cumsum(y, axis=0) / np.arange(1, t + 1)[:, None]
    return ffn.apply(cum_mean)


def _softmax_rows(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def standard_attention(q: np.ndarray, k: np.ndarray, v: np.ndarray) -> np.ndarray:
    """softmax(Q K^T / sqrt(d_k)) V with row-stabilized softmax."""
    q, k, v = (np.asarray(a, dtype=float) for a in (q, k, v))
    if q.ndim != 2 or k.ndim != 2 or v.ndim != 2:
        raise ValueError("q, k, v must be 2-D")
    if q.shape[1] != k.shape[1]:
        raise ValueError("q and k widths differ")
    if k.shape[0] != v.shape[0]:
        raise ValueError("k and v row counts differ")
    logits = q @ k.T / np.sqrt(q.shape[1])
    return _softmax_rows(logits) @ v


def talking_heads_attention(
    q: np.ndarray,
    k: np.ndarray,
    v: np.ndarray,
    w_logits: np.ndarray,
    w_scores: np.ndarray,
) -> np.ndarray:
    """Multi-head attention with learned head mixing of the logits
    (before softmax) and of the scores (after softmax, before V).

    q, k, v are stacked per head: (H, m, d_k), (H, n, d_k), (H, n, d_v).
    w_logits and w_scores are HxH; mixing acts along the head axis,
    elementwise over the (query, key) grid. Returns (H, m, d_v).
    """
    q, k, v = (np.asarray(a, dtype=float) for a in (q, k, v))
    w_logits = np.asarray(w_logits, dtype=float)
    w_scores = np.asarray(w_scores, dtype=float)
    if q.ndim != 3 or k.ndim != 3 or v.ndim != 3:
        raise ValueError("q, k, v must be stacked per head, 3-D")
    h = q.shape[0]
    if k.shape[0] != h or v.shape[0] != h:
        raise ValueError("head counts differ")
    if q.shape[2] != k.shape[2] or k.shape[1] != v.shape[1]:
        raise ValueError("per-head shapes incompatible")
    if w_logits.shape != (h, h) or w_scores.shape != (h, h):
        raise ValueError(f"head-mixing matrices must be {h}x{h}")
    logits = q @ k.transpose(0, 2, 1) / np.sqrt(q.shape[2])
    mixed_logits = np.einsum("hmn,hg->gmn", logits, w_logits)
    probs = _softmax_rows(mixed_logits)
    mixed_scores = np.einsum("hmn,hg->gmn", probs, w_scores)
    return mixed_scores @ v


def kernels_selfcheck(seed: int = 0) -> dict[str, float]:
    """Quick loop-based cross-checks; returns max absolute deviations."""
    rng = np.random.default_rng(seed)
    report = {}

    y = rng.normal(size=(6, 5))
    ffn = FfnParams.identity(5)
    expected = np.stack([y[: i + 1].mean(axis=0) for i in range(6)])
    report["aan_prefix_mean"] = float(np.abs(aan_context(y, ffn) - expected).max())

    q, k, v = rng.normal(size=(3, 4)), rng.normal(size=(5, 4)), rng.normal(size=(5, 2))
    logits = np.array(
        [[q[i] @ k[j] / np.sqrt(4) for j in range(5)] for i in range(3)]
    )
    probs = np.array([np.exp(r - r.max()) / np.exp(r - r.max()).sum() for r in logits])
    report["standard_attention"] = float(
        np.abs(standard_attention(q, k, v) - probs @ v).max()
    )

    hq = rng.normal(size=(2, 3, 4))
    hk = rng.normal(size=(2, 5, 4))
    hv = rng.normal(size=(2, 5, 3))
    eye = np.eye(2)
    per_head = np.stack([standard_attention(hq[i], hk[i], hv[i]) for i in range(2)])
    report["talking_heads_identity"] = float(
        np.abs(talking_heads_attention(hq, hk, hv, eye, eye) - per_head).max()
    )
    return report
