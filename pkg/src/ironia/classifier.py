"""Feed-forward classification head over 768-dim embeddings.

Architecture is fixed: 768 inputs, one ReLU hidden layer of 50 units, and a
2- or 4-node output layer (sigmoid nodes in binary mode, softmax in
multiclass). Training is mini-batch Adam with an epoch cap and early
stopping when validation loss diverges from training loss.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import kernels
from .corpus import Mode
from .errors import DimError, EmptyDatasetError, LabelError

INPUT_DIM = 768
HIDDEN_DIM = 50

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class HeadParams:
    """Weights of the 768 -> 50 -> output_dim head."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    output_dim: int

    def __post_init__(self) -> None:
        if self.output_dim not in (2, 4):
            raise DimError(f"output_dim must be 2 or 4, got {self.output_dim}")
        expected = {
            "W1": (INPUT_DIM, HIDDEN_DIM),
            "b1": (HIDDEN_DIM,),
            "W2": (HIDDEN_DIM, self.output_dim),
            "b2": (self.output_dim,),
        }
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise DimError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.isfinite(arr).all():
                raise DimError(f"{name} contains non-finite values")

    def copy(self) -> "HeadParams":
        return HeadParams(
            self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy(), self.output_dim
        )

    def arrays(self) -> tuple[np.ndarray, ...]:
        return self.W1, self.b1, self.W2, self.b2


class StopReason(str, Enum):
    MAX_EPOCHS = "max_epochs"
    EARLY_DIVERGENCE = "early_divergence"


@dataclass
class TrainingConfig:
    max_epochs: int = 1500
    patience: float = 50
    divergence_gap: float = 0.1
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 13
    mode: Mode = Mode.MULTICLASS

    def __post_init__(self) -> None:
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if not (self.patience >= 1):
            raise ValueError("patience must be >= 1 (math.inf disables early stop)")
        if self.divergence_gap <= 0:
            raise ValueError("divergence_gap must be > 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    @property
    def output_dim(self) -> int:
        return 2 if self.mode is Mode.BINARY else 4


@dataclass
class TrainingHistory:
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    stop_reason: StopReason = StopReason.MAX_EPOCHS
    best_epoch: int = 0  # 1-based epoch with the minimum validation loss

    def __len__(self) -> int:
        return len(self.train_losses)

    def to_dict(self) -> dict:
        return {
            "train_losses": self.train_losses,
            "val_losses": self.val_losses,
            "stop_reason": self.stop_reason.value,
            "best_epoch": self.best_epoch,
        }


@dataclass(frozen=True)
class EmbeddedSet:
    """Embedded, encoded samples ready for the head: x (n, 768), y (n,)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        if self.x.ndim != 2 or self.x.shape[1] != INPUT_DIM:
            raise DimError(f"x must be (n, {INPUT_DIM}), got {self.x.shape}")
        if self.y.shape != (self.x.shape[0],):
            raise DimError("y must have one class index per row of x")

    def __len__(self) -> int:
        return self.x.shape[0]


def init_head(output_dim: int, seed: int) -> HeadParams:
    """Symmetric uniform init scaled by fan-in, zero biases, seeded."""
    if output_dim not in (2, 4):
        raise DimError(f"output_dim must be 2 or 4, got {output_dim}")
    rng = np.random.default_rng(seed)
    lim1 = 1.0 / math.sqrt(INPUT_DIM)
    lim2 = 1.0 / math.sqrt(HIDDEN_DIM)
    return HeadParams(
        W1=rng.uniform(-lim1, lim1, size=(INPUT_DIM, HIDDEN_DIM)),
        b1=np.zeros(HIDDEN_DIM),
        W2=rng.uniform(-lim2, lim2, size=(HIDDEN_DIM, output_dim)),
        b2=np.zeros(output_dim),
        output_dim=output_dim,
    )


def forward(head: HeadParams, x: np.ndarray, backend=None) -> np.ndarray:
    """Class scores for one embedding: softmax probabilities (4 classes)
    or per-node sigmoids (2 nodes)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (INPUT_DIM,):
        raise DimError(f"input must be a {INPUT_DIM}-vector, got {x.shape}")
    kb = backend or kernels.get_backend()
    _, _, probs = kb.forward_batch(
        x.reshape(1, -1), head.W1, head.b1, head.W2, head.b2, head.output_dim == 2
    )
    return probs[0]


def forward_batch(head: HeadParams, X: np.ndarray, backend=None) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != INPUT_DIM:
        raise DimError(f"X must be (n, {INPUT_DIM}), got {X.shape}")
    kb = backend or kernels.get_backend()
    _, _, probs = kb.forward_batch(
        X, head.W1, head.b1, head.W2, head.b2, head.output_dim == 2
    )
    return probs


def loss(scores: np.ndarray, true_label: int, mode: Mode, backend=None) -> float:
    """Loss of one prediction: negative log-probability of the true class
    (multiclass) or the mean of the two per-node cross-entropies (binary)."""
    scores = np.asarray(scores, dtype=np.float64)
    k = scores.shape[0]
    if not 0 <= true_label < k:
        raise LabelError(f"label {true_label} out of range for {k} classes")
    kb = backend or kernels.get_backend()
    return kb.mean_loss(
        scores.reshape(1, -1), np.array([true_label], dtype=np.int64), mode is Mode.BINARY
    )


def dataset_loss(head: HeadParams, data: EmbeddedSet, mode: Mode, backend=None) -> float:
    kb = backend or kernels.get_backend()
    probs = forward_batch(head, data.x, backend=kb)
    return kb.mean_loss(probs, data.y.astype(np.int64), mode is Mode.BINARY)


def batch_gradients(head: HeadParams, X, y, mode: Mode, backend=None):
    """Mean-loss gradients for a batch; returns (loss, gW1, gb1, gW2, gb2)."""
    kb = backend or kernels.get_backend()
    return kb.batch_gradients(
        np.ascontiguousarray(X, dtype=np.float64),
        np.asarray(y, dtype=np.int64),
        head.W1,
        head.b1,
        head.W2,
        head.b2,
        mode is Mode.BINARY,
    )


def train(
    head: HeadParams,
    train_set: EmbeddedSet,
    val_set: EmbeddedSet,
    config: TrainingConfig,
    loss_hook: Optional[Callable[[int], tuple[float, float]]] = None,
    backend=None,
) -> tuple[HeadParams, TrainingHistory]:
    """Mini-batch Adam on the head only; deterministic under config.seed.

    After each epoch the train/validation losses are recorded; training
    stops at max_epochs, or earlier once (val - train) exceeds the
    divergence gap and validation has not improved for `patience` epochs.
    The returned parameters are the snapshot from the best epoch.

    `loss_hook(epoch) -> (train_loss, val_loss)` replaces the measured
    epoch losses when given; it exists so tests can script loss schedules
    against the stopping rule.
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise EmptyDatasetError("train and validation sets must be non-empty")
    if head.output_dim != config.output_dim:
        raise DimError(
            f"head output_dim {head.output_dim} does not match mode {config.mode.value}"
        )
    for part in (train_set, val_set):
        if part.y.min() < 0 or part.y.max() >= head.output_dim:
            raise LabelError("class index out of range for the head")

    kb = backend or kernels.get_backend()
    binary = config.mode is Mode.BINARY
    rng = np.random.default_rng(config.seed)
    params = head.copy()
    moments = [(np.zeros_like(a), np.zeros_like(a)) for a in params.arrays()]
    step = 0

    history = TrainingHistory()
    best = params.copy()
    best_val = math.inf

    X, y = train_set.x, train_set.y.astype(np.int64)
    n = len(train_set)
    for epoch in range(1, config.max_epochs + 1):
        perm = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = perm[start : start + config.batch_size]
            _, *grads = kb.batch_gradients(
                np.ascontiguousarray(X[batch]),
                y[batch],
                params.W1,
                params.b1,
                params.W2,
                params.b2,
                binary,
            )
            step += 1
            for arr, grad, (m, v) in zip(params.arrays(), grads, moments):
                kb.adam_step(
                    arr, grad, m, v, step,
                    config.learning_rate, ADAM_BETA1, ADAM_BETA2, ADAM_EPS,
                )

        if loss_hook is not None:
            train_loss, val_loss = loss_hook(epoch)
        else:
            train_loss = dataset_loss(params, train_set, config.mode, backend=kb)
            val_loss = dataset_loss(params, val_set, config.mode, backend=kb)
        history.train_losses.append(train_loss)
        history.val_losses.append(val_loss)

        if val_loss < best_val:
            best_val = val_loss
            best = params.copy()
            history.best_epoch = epoch

        stalled = epoch - history.best_epoch
        if (val_loss - train_loss) > config.divergence_gap and stalled >= config.patience:
            history.stop_reason = StopReason.EARLY_DIVERGENCE
            break
    else:
        history.stop_reason = StopReason.MAX_EPOCHS

    return best, history


# -- checkpoint format -------------------------------------------------------
# One JSON header line, then the raw little-endian float64 arrays W1, b1,
# W2, b2 in C order.

def save_head(
    path: str | Path,
    head: HeadParams,
    mode: Mode,
    encoder_id: str,
    pooling: str,
    seed: int,
) -> None:
    header = {
        "output_dim": head.output_dim,
        "mode": mode.value,
        "encoder_id": encoder_id,
        "pooling": pooling,
        "seed": seed,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for arr in head.arrays():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_head(path: str | Path) -> tuple[HeadParams, dict]:
    path = Path(path)
    with path.open("rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        k = int(header["output_dim"])
        shapes = [(INPUT_DIM, HIDDEN_DIM), (HIDDEN_DIM,), (HIDDEN_DIM, k), (k,)]
        arrays = []
        for shape in shapes:
            count = int(np.prod(shape))
            buf = fh.read(count * struct.calcsize("<d"))
            if len(buf) != count * 8:
                raise DimError(f"checkpoint {path} is truncated")
            arrays.append(np.frombuffer(buf, dtype="<f8").astype(np.float64).reshape(shape))
    head = HeadParams(*arrays, output_dim=k)
    return head, header
