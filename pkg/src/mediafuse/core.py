"""Domain types shared by every pipeline stage.

Labels are carried as ordinal indices; class names only appear at I/O
boundaries (see :mod:`mediafuse.io`).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidConfig, InvalidDomain, ShapeError, StratificationWarning, UnknownLabel


def normalize_domain(raw: str) -> str:
    """Reduce a URL or host string to the key used for node identity.

    >>> normalize_domain("https://www.cnn.com/")
    'cnn.com'
    """
    s = raw.strip().lower()
    for scheme in ("http://", "https://"):
        if s.startswith(scheme):
            s = s[len(scheme):]
            break
    if s.startswith("www."):
        s = s[4:]
    s = s.split("/", 1)[0]
    s = s.rstrip(".")
    if not s:
        raise InvalidDomain(f"empty domain after normalization: {raw!r}")
    return s


@dataclass(frozen=True)
class LabelScale:
    name: str
    classes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        if not self.classes:
            raise InvalidConfig(f"label scale {self.name!r} has no classes")
        if len(set(self.classes)) != len(self.classes):
            raise InvalidConfig(f"label scale {self.name!r} has duplicate classes")

    def __len__(self):
        return len(self.classes)

    @property
    def middle(self) -> int:
        return len(self.classes) // 2

    def index(self, class_name: str) -> int:
        return ordinal_index(self, class_name)

    def name_of(self, index: int) -> str:
        return self.classes[index]


def ordinal_index(scale: LabelScale, class_name: str) -> int:
    try:
        return scale.classes.index(class_name)
    except ValueError:
        raise UnknownLabel(f"{class_name!r} is not a class of scale {scale.name!r}") from None


BIAS3 = LabelScale("bias3", ("left", "center", "right"))
BIAS5 = LabelScale("bias5", ("left", "left-center", "center", "right-center", "right"))
FACT3 = LabelScale("fact3", ("low", "mixed", "high"))
FACT5 = LabelScale("fact5", ("very-low", "low", "mixed", "high", "very-high"))

SCALES = MappingProxyType({s.name: s for s in (BIAS3, BIAS5, FACT3, FACT5)})


def get_scale(name: str) -> LabelScale:
    try:
        return SCALES[name]
    except KeyError:
        raise InvalidConfig(f"unknown label scale {name!r}; expected one of {sorted(SCALES)}") from None


class ViewId(enum.IntEnum):
    ALEXA = 0
    HYPERLINK = 1
    LLM = 2
    ARTICLES = 3
    WIKIPEDIA = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, name: str | "ViewId") -> "ViewId":
        if isinstance(name, ViewId):
            return name
        if isinstance(name, int):
            try:
                return cls(name)
            except ValueError:
                raise InvalidConfig(f"unknown view index {name}") from None
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise InvalidConfig(f"unknown view {name!r}") from None


VIEWS: tuple[ViewId, ...] = tuple(ViewId)
GRAPH_VIEWS = (ViewId.ALEXA, ViewId.HYPERLINK, ViewId.LLM)
TEXT_VIEWS = (ViewId.ARTICLES, ViewId.WIKIPEDIA)


@dataclass(frozen=True)
class Outlet:
    domain: str
    bias: int | None = None
    factuality: int | None = None

    def __post_init__(self):
        if normalize_domain(self.domain) != self.domain:
            raise InvalidDomain(f"outlet domain is not normalized: {self.domain!r}")

    def label(self, task: str) -> int | None:
        if task == "bias":
            return self.bias
        if task == "factuality":
            return self.factuality
        raise InvalidConfig(f"unknown task {task!r}")


class EmbeddingTable:
    """Per-view mapping from outlet domain to a fixed-length float vector."""

    def __init__(self, view: ViewId, dim: int, rows: Mapping[str, Sequence[float]]):
        if dim <= 0:
            raise ShapeError("embedding dim must be positive")
        self.view = ViewId.parse(view)
        self.dim = int(dim)
        frozen = {}
        for domain, vec in rows.items():
            arr = np.array(vec, dtype=np.float64)
            if arr.shape != (self.dim,):
                raise ShapeError(f"row {domain!r} has shape {arr.shape}, expected ({self.dim},)")
            if not np.all(np.isfinite(arr)):
                raise ShapeError(f"row {domain!r} has non-finite values")
            arr.setflags(write=False)
            frozen[domain] = arr
        self._rows = MappingProxyType(frozen)

    @property
    def rows(self) -> Mapping[str, np.ndarray]:
        return self._rows

    def __contains__(self, domain):
        return domain in self._rows

    def __getitem__(self, domain) -> np.ndarray:
        return self._rows[domain]

    def __len__(self):
        return len(self._rows)

    def get(self, domain, default=None):
        return self._rows.get(domain, default)

    def matrix(self, domains: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(domains), self.dim))
        for i, d in enumerate(domains):
            row = self._rows.get(d)
            if row is not None:
                out[i] = row
        return out


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[str, ...]
    dev: tuple[str, ...]
    test: tuple[str, ...]

    def __post_init__(self):
        parts = [set(self.train), set(self.dev), set(self.test)]
        if parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2]:
            raise InvalidConfig("dataset splits overlap")

    def as_dict(self) -> dict[str, list[str]]:
        return {"train": list(self.train), "dev": list(self.dev), "test": list(self.test)}

    def part(self, name: str) -> tuple[str, ...]:
        if name not in ("train", "dev", "test"):
            raise InvalidConfig(f"unknown split {name!r}")
        return getattr(self, name)


@dataclass(frozen=True)
class MetricsReport:
    mae: float
    macro_f1: float
    accuracy: float
    macro_precision: float
    macro_recall: float
    confusion: tuple[tuple[int, ...], ...] = field(default=(), compare=False)

    def as_dict(self) -> dict:
        return {
            "mae": self.mae,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "confusion": [list(r) for r in self.confusion],
        }


def split_quotas(class_counts: Sequence[int], ratios: Sequence[float]) -> np.ndarray:
    """Integer (class x split) allocation for a stratified split.

    Split totals come from largest-remainder rounding of the global count.
    Each class gets the floor of its exact quota per split, and leftover
    units go to the cells with the largest fractional parts (ties by class
    index, then split order) subject to those totals.  Every cell ends up
    within one unit of its exact proportion.
    """
    counts = np.asarray(class_counts, dtype=np.int64)
    r = np.asarray(ratios, dtype=np.float64)
    if r.ndim != 1 or np.any(r < 0) or not math.isclose(float(r.sum()), 1.0, abs_tol=1e-9):
        raise InvalidConfig(f"split ratios must be non-negative and sum to 1, got {list(ratios)}")
    n_split = len(r)

    total = int(counts.sum())
    exact_tot = total * r
    tot = np.floor(exact_tot + 1e-9).astype(np.int64)
    frac_tot = exact_tot - tot
    for s in sorted(range(n_split), key=lambda s: (-frac_tot[s], s))[: total - int(tot.sum())]:
        tot[s] += 1

    exact = counts[:, None] * r[None, :]
    alloc = np.floor(exact + 1e-9).astype(np.int64)
    frac = exact - alloc
    class_left = counts - alloc.sum(axis=1)
    split_need = tot - alloc.sum(axis=0)
    bumped = np.zeros_like(alloc, dtype=bool)

    cells = sorted(
        ((c, s) for c in range(len(counts)) for s in range(n_split)),
        key=lambda cs: (-frac[cs], cs[0], cs[1]),
    )
    for c, s in cells:
        if class_left[c] > 0 and split_need[s] > 0 and frac[c, s] > 1e-12:
            alloc[c, s] += 1
            bumped[c, s] = True
            class_left[c] -= 1
            split_need[s] -= 1
    # greedy can strand units; any unbumped cell keeps the +-1 bound
    for c, s in cells:
        if class_left[c] > 0 and split_need[s] > 0 and not bumped[c, s]:
            alloc[c, s] += 1
            bumped[c, s] = True
            class_left[c] -= 1
            split_need[s] -= 1
    for c in range(len(counts)):
        for s in range(n_split):
            if class_left[c] > 0 and not bumped[c, s]:
                alloc[c, s] += 1
                bumped[c, s] = True
                class_left[c] -= 1
    return alloc


def stratified_split(
    outlets: Iterable[Outlet],
    ratios: Sequence[float] = (0.8, 0.1, 0.1),
    seed: int = 0,
    task: str = "bias",
) -> DatasetSplit:
    outlets = list(outlets)
    if len(ratios) != 3:
        raise InvalidConfig("ratios must have three entries (train, dev, test)")
    by_class: dict[int, list[str]] = {}
    seen = set()
    for o in outlets:
        y = o.label(task)
        if y is None:
            raise InvalidConfig(f"outlet {o.domain!r} has no {task} label")
        if o.domain in seen:
            raise InvalidConfig(f"duplicate outlet {o.domain!r}")
        seen.add(o.domain)
        by_class.setdefault(y, []).append(o.domain)

    classes = sorted(by_class)
    for c in classes:
        if len(by_class[c]) < 3:
            warnings.warn(
                f"class {c} has {len(by_class[c])} members; placing train-first",
                StratificationWarning,
                stacklevel=2,
            )
    alloc = split_quotas([len(by_class[c]) for c in classes], ratios)

    rng = np.random.default_rng(seed)
    parts: list[list[str]] = [[], [], []]
    for ci, c in enumerate(classes):
        members = sorted(by_class[c])
        order = rng.permutation(len(members))
        members = [members[i] for i in order]
        start = 0
        for s in range(3):
            parts[s].extend(members[start:start + alloc[ci, s]])
            start += alloc[ci, s]
    return DatasetSplit(*(tuple(sorted(p)) for p in parts))
