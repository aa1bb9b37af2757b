"""Ordinal-aware metrics and dummy baselines."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import LabelScale, MetricsReport
from .errors import NoData, ShapeError
from .numkit import kernels

COLUMNS = ("MAE", "Macro-F1", "Accuracy", "Precision", "Recall")


def confusion_matrix(truths, preds, n_classes) -> np.ndarray:
    """Counts with truths on rows and predictions on columns."""
    t = np.asarray(truths, dtype=np.int64)
    p = np.asarray(preds, dtype=np.int64)
    if t.shape != p.shape:
        raise ShapeError(f"{len(p)} predictions for {len(t)} truths")
    if t.size and (min(t.min(), p.min()) < 0 or max(t.max(), p.max()) >= n_classes):
        raise ShapeError("labels outside the scale")
    return kernels.confusion_counts(t, p, n_classes)


def _safe_div(num, den):
    return np.divide(num, den, out=np.zeros_like(num, dtype=np.float64), where=den > 0)


def compute_metrics(preds: Sequence[int], truths: Sequence[int], scale: LabelScale) -> MetricsReport:
    """MAE on ordinal indices plus macro scores over every class of ``scale``.

    Percent-valued fields are unrounded; round only when rendering.
    """
    p = np.asarray(preds, dtype=np.int64)
    t = np.asarray(truths, dtype=np.int64)
    if p.shape != t.shape:
        raise ShapeError(f"{len(p)} predictions for {len(t)} truths")
    if p.size == 0:
        raise NoData("cannot score an empty prediction list")
    cm = confusion_matrix(t, p, len(scale))
    tp = np.diag(cm).astype(np.float64)
    precision = _safe_div(tp, cm.sum(axis=0).astype(np.float64))
    recall = _safe_div(tp, cm.sum(axis=1).astype(np.float64))
    f1 = _safe_div(2 * precision * recall, precision + recall)
    return MetricsReport(
        mae=float(np.mean(np.abs(p - t))),
        macro_f1=100.0 * float(f1.mean()),
        accuracy=100.0 * float(tp.sum() / p.size),
        macro_precision=100.0 * float(precision.mean()),
        macro_recall=100.0 * float(recall.mean()),
        confusion=tuple(tuple(int(v) for v in row) for row in cm),
    )


def majority_class(train_truths, n_classes) -> int:
    counts = np.bincount(np.asarray(train_truths, dtype=np.int64), minlength=n_classes)
    return int(np.argmax(counts))


def majority_baseline(train_truths, test_truths, scale: LabelScale) -> MetricsReport:
    if len(train_truths) == 0:
        raise NoData("majority baseline needs training labels")
    c = majority_class(train_truths, len(scale))
    return compute_metrics([c] * len(test_truths), test_truths, scale)


def middle_baseline(test_truths, scale: LabelScale) -> MetricsReport:
    return compute_metrics([scale.middle] * len(test_truths), test_truths, scale)


def render_table(rows) -> str:
    """Fixed-width table; ``rows`` is a list of (name, MetricsReport)."""
    width = max([len("Model")] + [len(name) for name, _ in rows])
    head = f"{'Model':<{width}}  " + "  ".join(f"{c:>9}" for c in COLUMNS)
    lines = [head, "-" * len(head)]
    for name, r in rows:
        vals = [f"{r.mae:9.3f}"] + [
            f"{v:9.2f}" for v in (r.macro_f1, r.accuracy, r.macro_precision, r.macro_recall)
        ]
        lines.append(f"{name:<{width}}  " + "  ".join(vals))
    return "\n".join(lines)
