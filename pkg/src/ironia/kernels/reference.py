"""Numpy reference implementations of the hot kernels.

This is the fallback backend used when the compiled extension is missing.
The compiled backend must agree with these functions; keep the formulas in
sync down to clamping constants and evaluation order of elementwise ops.
"""

from __future__ import annotations

import numpy as np

NAME = "reference"

PROB_EPS = 1e-12

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_U64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a over raw bytes."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _U64
    return h


def stub_expand(key: int, n: int) -> np.ndarray:
    """Expand a 64-bit key into n doubles in [-1, 1) via a splitmix-style
    counter generator. Pure integer arithmetic up to the final scaling, so
    the output is bit-identical on every platform."""
    counters = (key + np.arange(1, n + 1, dtype=np.uint64) * np.uint64(_SPLITMIX_GAMMA)).astype(
        np.uint64
    )
    z = counters
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    mantissa = (z >> np.uint64(11)).astype(np.float64)
    return mantissa * (2.0 ** -53) * 2.0 - 1.0


def forward_batch(X, W1, b1, W2, b2, binary: bool):
    """Forward pass over a batch: relu(X@W1+b1) @ W2 + b2, then softmax
    rows (multiclass) or elementwise stable sigmoid (binary).

    Returns (hidden, logits, probs).
    """
    H = X @ W1 + b1
    np.maximum(H, 0.0, out=H)
    Z = H @ W2 + b2
    if binary:
        P = _sigmoid(Z)
    else:
        shifted = Z - Z.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        P = e / e.sum(axis=1, keepdims=True)
    return H, Z, P


def _sigmoid(Z):
    # exp(-|z|) never overflows; both branches are algebraically the same.
    e = np.exp(-np.abs(Z))
    return np.where(Z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def mean_loss(P, y, binary: bool) -> float:
    """Mean loss over the batch given probabilities from forward_batch.

    Multiclass: negative log of the true-class probability. Binary: mean of
    the per-node cross-entropies against the one-hot target.
    """
    n, k = P.shape
    clamped = np.clip(P, PROB_EPS, 1.0 - PROB_EPS)
    if binary:
        T = np.zeros((n, k))
        T[np.arange(n), y] = 1.0
        per_node = -(T * np.log(clamped) + (1.0 - T) * np.log(1.0 - clamped))
        return float(per_node.mean(axis=1).mean())
    return float(-np.log(clamped[np.arange(n), y]).mean())


def batch_gradients(X, y, W1, b1, W2, b2, binary: bool):
    """Fused forward/backward pass; returns (loss, gW1, gb1, gW2, gb2).

    Gradients are of the batch-mean loss with respect to each parameter.
    """
    n, k = X.shape[0], W2.shape[1]
    H, Z, P = forward_batch(X, W1, b1, W2, b2, binary)
    T = np.zeros((n, k))
    T[np.arange(n), y] = 1.0
    if binary:
        dZ = (P - T) / (k * n)
    else:
        dZ = (P - T) / n
    gW2 = H.T @ dZ
    gb2 = dZ.sum(axis=0)
    dH = dZ @ W2.T
    dH[H <= 0.0] = 0.0
    gW1 = X.T @ dH
    gb1 = dH.sum(axis=0)
    return mean_loss(P, y, binary), gW1, gb1, gW2, gb2


def adam_step(param, grad, m, v, step: int, lr: float, beta1: float, beta2: float, eps: float):
    """One in-place Adam update. `step` is 1-based."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    correction1 = 1.0 - beta1 ** step
    correction2 = 1.0 - beta2 ** step
    param -= lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
