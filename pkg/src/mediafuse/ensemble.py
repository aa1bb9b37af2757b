"""Article-to-outlet aggregation by hard and soft voting."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import LabelScale
from .errors import NoPredictions, ShapeError

PROBA_TOL = 1e-9


@dataclass
class PredictionSet:
    unit: str
    scale: LabelScale
    items: list = field(default_factory=list)

    def __post_init__(self):
        if self.unit not in ("article", "outlet"):
            raise ShapeError(f"unit must be 'article' or 'outlet', got {self.unit!r}")
        for item_id, p in self.items:
            _check_proba(p, len(self.scale), item_id)

    def add(self, item_id, proba):
        _check_proba(proba, len(self.scale), item_id)
        self.items.append((item_id, np.asarray(proba, dtype=np.float64)))

    def as_dict(self):
        return {item_id: np.asarray(p) for item_id, p in self.items}


def _check_proba(p, n_classes, item_id=None):
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (n_classes,):
        raise ShapeError(f"{item_id}: probability vector has shape {p.shape}, expected ({n_classes},)")
    if np.any(p < 0) or abs(p.sum() - 1.0) > PROBA_TOL:
        raise ShapeError(f"{item_id}: probabilities must be non-negative and sum to 1")
    return p


def _stack(preds, scale):
    preds = [np.asarray(p, dtype=np.float64) for p in preds]
    if not preds:
        raise NoPredictions("nothing to vote on")
    arr = np.vstack(preds)
    if arr.shape[1] != len(scale):
        raise ShapeError(f"probability vectors must have {len(scale)} entries")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ShapeError("probability vectors must be finite and non-negative")
    return arr


def hard_vote(preds: Sequence, scale: LabelScale) -> int:
    """Majority of per-item argmaxes; ties go to the lowest ordinal."""
    arr = _stack(preds, scale)
    counts = np.bincount(np.argmax(arr, axis=1), minlength=len(scale))
    return int(np.argmax(counts))


def soft_vote(preds: Sequence, scale: LabelScale):
    """(argmax of the mean vector, mean vector renormalized to sum 1)."""
    arr = _stack(preds, scale)
    mean = arr.mean(axis=0)
    mean = mean / mean.sum()
    return int(np.argmax(mean)), mean


def vote(preds, scale, mode):
    if mode == "hard":
        c = hard_vote(preds, scale)
        proba = np.zeros(len(scale))
        proba[c] = 1.0
        return c, proba
    if mode == "soft":
        return soft_vote(preds, scale)
    raise ShapeError(f"unknown voting mode {mode!r}")


def outlet_aggregate(article_preds: Iterable, scale: LabelScale, mode="soft", outlets: Sequence[str] | None = None):
    """Group ``(outlet, proba)`` rows by outlet and vote within each group.

    Returns (outlet PredictionSet sorted by domain, outlets with no articles).
    Hard voting reports a one-hot vector for the winning class.
    """
    groups: dict[str, list] = {}
    for outlet, proba in article_preds:
        groups.setdefault(outlet, []).append(proba)
    result = PredictionSet("outlet", scale)
    for outlet in sorted(groups):
        _, proba = vote(groups[outlet], scale, mode)
        result.add(outlet, proba)
    missing = sorted(set(outlets or ()) - set(groups))
    return result, missing


def ensemble_outputs(outputs: Sequence[Mapping[str, np.ndarray]], scale: LabelScale, mode="soft"):
    """Vote across several models' outlet-level outputs, per outlet."""
    rows = []
    for out in outputs:
        rows.extend(out.items())
    return outlet_aggregate(rows, scale, mode)[0]
