"""Confusion-matrix metrics and evaluation reports.

Rows of a confusion matrix are gold classes, columns are predictions.
Multiclass reports aggregate with a support-weighted average (the W. AVG
row); binary reports use the unweighted macro average (the AVG row).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifier import EmbeddedSet, HeadParams, forward_batch
from .corpus import MODE_LABELS, Label, Mode
from .errors import DimError, EmptyConfusionError, EmptyDatasetError

# English display names used in the result tables.
DISPLAY_NAMES = {
    Label.IRONIA: "IRONY",
    Label.NEGATIVO: "NEGATIVE",
    Label.NEUTRO: "NEUTRAL",
    Label.POSITIVO: "POSITIVE",
    Label.NO_IRONIA: "NOT IRONY",
}

AGGREGATE_ROW = {"weighted": "W. AVG", "macro": "AVG"}


@dataclass(frozen=True)
class ClassMetrics:
    label: str
    precision: float
    recall: float
    f1: float
    support: int
    degenerate: bool = False  # a zero-denominator was reported as 0.0


@dataclass(frozen=True)
class EvalReport:
    per_class: tuple[ClassMetrics, ...]
    accuracy: float
    averaging: str  # "weighted" | "macro"
    aggregate_precision: float
    aggregate_recall: float
    aggregate_f1: float
    total: int
    confusion: tuple[tuple[int, ...], ...] = field(default=())

    @property
    def aggregate_row_label(self) -> str:
        return AGGREGATE_ROW[self.averaging]

    def to_dict(self) -> dict:
        return {
            "per_class": [
                {
                    "label": c.label,
                    "precision": c.precision,
                    "recall": c.recall,
                    "f1": c.f1,
                    "support": c.support,
                    "degenerate": c.degenerate,
                }
                for c in self.per_class
            ],
            "accuracy": self.accuracy,
            "averaging": self.averaging,
            "aggregate": {
                "precision": self.aggregate_precision,
                "recall": self.aggregate_recall,
                "f1": self.aggregate_f1,
            },
            "total": self.total,
            "confusion": [list(row) for row in self.confusion],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "EvalReport":
        return cls(
            per_class=tuple(
                ClassMetrics(
                    label=c["label"],
                    precision=c["precision"],
                    recall=c["recall"],
                    f1=c["f1"],
                    support=c["support"],
                    degenerate=c.get("degenerate", False),
                )
                for c in raw["per_class"]
            ),
            accuracy=raw["accuracy"],
            averaging=raw["averaging"],
            aggregate_precision=raw["aggregate"]["precision"],
            aggregate_recall=raw["aggregate"]["recall"],
            aggregate_f1=raw["aggregate"]["f1"],
            total=raw["total"],
            confusion=tuple(tuple(row) for row in raw.get("confusion", ())),
        )


def metrics_from_confusion(
    confusion, averaging: str, class_labels=None
) -> EvalReport:
    """Per-class precision/recall/F1 plus accuracy and an aggregate row.

    Zero-denominator cells yield 0.0 and set the class's degenerate flag
    instead of dropping the row, so table shapes stay stable.
    """
    C = np.asarray(confusion, dtype=np.int64)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] not in (2, 4):
        raise DimError(f"confusion must be 2x2 or 4x4, got {C.shape}")
    if (C < 0).any():
        raise DimError("confusion counts must be non-negative")
    if averaging not in AGGREGATE_ROW:
        raise ValueError(f"averaging must be weighted or macro, got {averaging!r}")
    total = int(C.sum())
    if total == 0:
        raise EmptyConfusionError("confusion matrix has no observations")

    k = C.shape[0]
    if class_labels is None:
        class_labels = [f"class_{i}" for i in range(k)]
    if len(class_labels) != k:
        raise DimError("one class label required per confusion row")

    rows = []
    for i in range(k):
        tp = int(C[i, i])
        gold = int(C[i, :].sum())
        predicted = int(C[:, i].sum())
        degenerate = gold == 0 or predicted == 0
        precision = tp / predicted if predicted else 0.0
        recall = tp / gold if gold else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        rows.append(
            ClassMetrics(
                label=str(class_labels[i]),
                precision=precision,
                recall=recall,
                f1=f1,
                support=gold,
                degenerate=degenerate,
            )
        )

    accuracy = float(np.trace(C)) / total
    if averaging == "weighted":
        weights = [r.support / total for r in rows]
    else:
        weights = [1.0 / k] * k
    agg = {
        name: float(sum(w * getattr(r, name) for w, r in zip(weights, rows)))
        for name in ("precision", "recall", "f1")
    }
    return EvalReport(
        per_class=tuple(rows),
        accuracy=accuracy,
        averaging=averaging,
        aggregate_precision=agg["precision"],
        aggregate_recall=agg["recall"],
        aggregate_f1=agg["f1"],
        total=total,
        confusion=tuple(tuple(int(x) for x in row) for row in C),
    )


def confusion_from_pairs(gold, predicted, k: int) -> np.ndarray:
    """k x k count matrix from parallel class-index sequences (rows = gold)."""
    C = np.zeros((k, k), dtype=np.int64)
    for g, p in zip(gold, predicted):
        C[int(g), int(p)] += 1
    return C


def predict(head: HeadParams, X: np.ndarray, backend=None) -> np.ndarray:
    """Argmax class indices; ties resolve to the lowest class index."""
    probs = forward_batch(head, X, backend=backend)
    return probs.argmax(axis=1)


def mode_for_dim(output_dim: int) -> Mode:
    return Mode.BINARY if output_dim == 2 else Mode.MULTICLASS


def evaluate(head: HeadParams, test_set: EmbeddedSet, backend=None) -> EvalReport:
    """Score the head on an embedded test set.

    The aggregate rule follows the task: support-weighted for the 4-class
    head, macro for the binary head.
    """
    if len(test_set) == 0:
        raise EmptyDatasetError("cannot evaluate on an empty test set")
    mode = mode_for_dim(head.output_dim)
    labels = [DISPLAY_NAMES[label] for label in MODE_LABELS[mode]]
    predictions = predict(head, test_set.x, backend=backend)
    confusion = confusion_from_pairs(test_set.y, predictions, head.output_dim)
    averaging = "macro" if mode is Mode.BINARY else "weighted"
    return metrics_from_confusion(confusion, averaging, class_labels=labels)
