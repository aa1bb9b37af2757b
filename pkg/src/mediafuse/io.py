"""Readers and writers for the on-disk formats.

* labels: JSONL ``{"domain", "bias", "factuality"}`` with class names or null
* splits: JSON ``{"train": [...], "dev": [...], "test": [...]}``
* embeddings: JSONL ``{"domain", "view", "vector"}``
* predictions: JSONL ``{"domain", "task", "pred", "proba"}`` (article rows
  also carry ``"outlet"``)

Writers emit sorted keys and one record per line so equal inputs give
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os
from typing import Iterable

import numpy as np

from .core import DatasetSplit, EmbeddingTable, LabelScale, Outlet, ViewId, normalize_domain
from .errors import InputError, InvalidDomain, ParseError, ShapeError, UnknownLabel


def write_jsonl(path, rows: Iterable[dict]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ":")) + "\n")


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def iter_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno, path=str(path)) from None


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, path=str(path)) from None


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------

def load_labels(path, bias_scale: LabelScale | None = None, fact_scale: LabelScale | None = None):
    """Outlets from a labels file; class names are mapped through the scales given."""
    outlets = []
    seen = set()
    for lineno, rec in iter_jsonl(path):
        try:
            domain = normalize_domain(rec["domain"])
        except (KeyError, TypeError, InvalidDomain) as exc:
            raise ParseError(f"bad domain: {exc}", line=lineno, path=str(path)) from None
        if domain in seen:
            raise ParseError(f"duplicate outlet {domain!r}", line=lineno, path=str(path))
        seen.add(domain)
        labels = {}
        for task, scale in (("bias", bias_scale), ("factuality", fact_scale)):
            name = rec.get(task)
            if name is None or scale is None:
                labels[task] = None
                continue
            try:
                labels[task] = scale.index(name)
            except UnknownLabel as exc:
                raise ParseError(str(exc), line=lineno, path=str(path)) from None
        outlets.append(Outlet(domain, labels["bias"], labels["factuality"]))
    return outlets


def save_splits(path, split: DatasetSplit, extra=None):
    obj = split.as_dict()
    obj.update(extra or {})
    write_json(path, obj)


def load_splits(path) -> DatasetSplit:
    obj = read_json(path)
    try:
        return DatasetSplit(*(tuple(normalize_domain(d) for d in obj[k]) for k in ("train", "dev", "test")))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad splits file: {exc}", path=str(path)) from None


def load_embeddings(path, view=None) -> EmbeddingTable:
    """One view's table; ``view`` filters multi-view files."""
    rows = {}
    file_view = None
    want = ViewId.parse(view) if view is not None else None
    for lineno, rec in iter_jsonl(path):
        try:
            v = ViewId.parse(rec["view"])
            domain = normalize_domain(rec["domain"])
            vec = [float(x) for x in rec["vector"]]
        except (KeyError, TypeError, ValueError, InputError) as exc:
            raise ParseError(f"bad embedding row: {exc}", line=lineno, path=str(path)) from None
        if want is not None and v != want:
            continue
        if file_view is None:
            file_view = v
        elif v != file_view:
            raise ParseError("file mixes views; pass view= to select one", line=lineno, path=str(path))
        rows[domain] = vec
    if file_view is None:
        if want is None:
            raise ParseError("no embedding rows", path=str(path))
        file_view = want
    dims = {len(v) for v in rows.values()}
    if len(dims) > 1:
        raise ParseError(f"rows have differing lengths {sorted(dims)}", path=str(path))
    try:
        return EmbeddingTable(file_view, dims.pop() if dims else 1, rows)
    except ShapeError as exc:
        raise ParseError(str(exc), path=str(path)) from None


def embedding_rows(table: EmbeddingTable, domains=None, extra=None):
    domains = sorted(table.rows) if domains is None else domains
    for d in domains:
        row = {"domain": d, "view": table.view.label, "vector": [float(x) for x in table[d]]}
        row.update(extra or {})
        yield row


def save_embeddings(path, table: EmbeddingTable, extra=None):
    write_jsonl(path, embedding_rows(table, extra=extra))


def prediction_rows(domains, proba, task, scale: LabelScale, extra=None):
    proba = np.asarray(proba, dtype=np.float64)
    for d, p in zip(domains, proba):
        row = {
            "domain": d,
            "task": task,
            "pred": scale.name_of(int(np.argmax(p))),
            "proba": [float(x) for x in p],
        }
        row.update(extra or {})
        yield row


def load_predictions(path, scale: LabelScale, task=None):
    """{domain: (predicted index, proba)} from a prediction file."""
    out = {}
    for lineno, rec in iter_jsonl(path):
        if task is not None and rec.get("task", task) != task:
            continue
        try:
            domain = normalize_domain(rec["domain"])
            proba = np.array(rec["proba"], dtype=np.float64) if rec.get("proba") is not None else None
            pred = scale.index(rec["pred"]) if "pred" in rec else int(np.argmax(proba))
        except (KeyError, TypeError, ValueError, InputError) as exc:
            raise ParseError(f"bad prediction row: {exc}", line=lineno, path=str(path)) from None
        out[domain] = (pred, proba)
    return out


def load_article_predictions(path, scale: LabelScale, task=None):
    """[(outlet, proba)] rows, in file order."""
    rows = []
    for lineno, rec in iter_jsonl(path):
        if task is not None and rec.get("task", task) != task:
            continue
        try:
            outlet = normalize_domain(rec["outlet"])
            proba = np.array(rec["proba"], dtype=np.float64)
        except (KeyError, TypeError, ValueError, InputError) as exc:
            raise ParseError(f"bad article prediction row: {exc}", line=lineno, path=str(path)) from None
        if proba.shape != (len(scale),):
            raise ParseError(f"proba has {proba.size} entries, scale has {len(scale)}", line=lineno, path=str(path))
        rows.append((outlet, proba))
    return rows


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
