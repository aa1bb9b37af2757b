import json

import numpy as np
import pytest

from mediafuse.core import BIAS3, FACT3, DatasetSplit, EmbeddingTable, Outlet, ViewId
from mediafuse.errors import InvalidConfig, ParseError
from mediafuse.io import (
    file_digest,
    iter_jsonl,
    load_article_predictions,
    load_embeddings,
    load_labels,
    load_predictions,
    load_splits,
    prediction_rows,
    save_embeddings,
    save_splits,
    write_jsonl,
)


def _lines(path, *rows):
    path.write_text("".join((r if isinstance(r, str) else json.dumps(r)) + "\n" for r in rows))
    return path


def test_labels_are_normalized_and_indexed(tmp_path):
    p = _lines(
        tmp_path / "labels.jsonl",
        {"domain": "https://www.CNN.com/", "bias": "left", "factuality": "mixed"},
        "",
        {"domain": "foxnews.com", "bias": "right", "factuality": None},
    )
    out = load_labels(p, BIAS3, FACT3)
    assert out == [Outlet("cnn.com", 0, 1), Outlet("foxnews.com", 2, None)]


@pytest.mark.parametrize(
    "bad, fragment",
    [
        ('{"domain": "c.com", "bias": "far-left"}', "far-left"),
        ('{"domain": "", "bias": "left"}', "domain"),
        ('{"domain": "b.com"', "invalid JSON"),
        ('{"domain": "www.a.com"}', "duplicate"),
    ],
)
def test_label_errors_name_the_line(tmp_path, bad, fragment):
    p = _lines(tmp_path / "labels.jsonl", {"domain": "a.com", "bias": "left"}, bad)
    with pytest.raises(ParseError) as info:
        load_labels(p, BIAS3, FACT3)
    assert info.value.line == 2
    assert ":2:" in str(info.value) and fragment in str(info.value)


def test_splits_round_trip(tmp_path):
    split = DatasetSplit(("a.com", "b.com"), ("c.com",), ("d.com",))
    save_splits(tmp_path / "s.json", split, extra={"config_hash": "x"})
    assert load_splits(tmp_path / "s.json") == split
    (tmp_path / "o.json").write_text(json.dumps({"train": ["a.com"], "dev": ["a.com"], "test": []}))
    with pytest.raises(InvalidConfig):
        load_splits(tmp_path / "o.json")
    (tmp_path / "m.json").write_text(json.dumps({"train": []}))
    with pytest.raises(ParseError):
        load_splits(tmp_path / "m.json")


def test_embeddings_round_trip_and_view_filter(tmp_path):
    table = EmbeddingTable(ViewId.WIKIPEDIA, 3, {"a.com": [1, 2, 3], "b.com": [0.1, 1e-300, -7]})
    save_embeddings(tmp_path / "e.jsonl", table)
    back = load_embeddings(tmp_path / "e.jsonl")
    assert back.view is ViewId.WIKIPEDIA and back.dim == 3
    for d in table.rows:
        assert back[d].tobytes() == table[d].tobytes()
    assert file_digest(tmp_path / "e.jsonl") == file_digest(tmp_path / "e.jsonl")

    p = _lines(
        tmp_path / "mixed.jsonl",
        {"domain": "a.com", "view": "articles", "vector": [1, 2]},
        {"domain": "a.com", "view": "llm", "vector": [3]},
    )
    with pytest.raises(ParseError):
        load_embeddings(p)
    assert load_embeddings(p, view="llm")["a.com"].tolist() == [3.0]


def test_embedding_errors(tmp_path):
    p = _lines(
        tmp_path / "e.jsonl",
        {"domain": "a.com", "view": "articles", "vector": [1, 2]},
        {"domain": "b.com", "view": "articles", "vector": [1]},
    )
    with pytest.raises(ParseError):
        load_embeddings(p)
    p = _lines(tmp_path / "f.jsonl", {"domain": "a.com", "view": "tv", "vector": [1]})
    with pytest.raises(ParseError) as info:
        load_embeddings(p)
    assert info.value.line == 1
    p = _lines(tmp_path / "g.jsonl", {"domain": "a.com", "view": "articles", "vector": [float("nan")]})
    with pytest.raises(ParseError):
        load_embeddings(p)


def test_predictions_round_trip(tmp_path):
    proba = np.array([[0.2, 0.5, 0.3], [0.9, 0.05, 0.05]])
    rows = list(prediction_rows(["a.com", "b.com"], proba, "bias", BIAS3, extra={"split": "test"}))
    assert [r["pred"] for r in rows] == ["center", "left"]
    write_jsonl(tmp_path / "p.jsonl", rows)
    back = load_predictions(tmp_path / "p.jsonl", BIAS3, task="bias")
    assert back["a.com"][0] == 1
    np.testing.assert_array_equal(back["b.com"][1], proba[1])
    assert load_predictions(tmp_path / "p.jsonl", BIAS3, task="factuality") == {}


def test_article_predictions(tmp_path):
    p = _lines(
        tmp_path / "a.jsonl",
        {"outlet": "www.a.com", "task": "bias", "proba": [0.1, 0.2, 0.7]},
        {"outlet": "a.com", "task": "bias", "proba": [0.5, 0.5]},
    )
    with pytest.raises(ParseError) as info:
        load_article_predictions(p, BIAS3)
    assert info.value.line == 2


def test_writers_are_byte_stable(tmp_path):
    rows = [{"b": 1, "a": [0.1, 2]}, {"z": None}]
    write_jsonl(tmp_path / "x.jsonl", rows)
    write_jsonl(tmp_path / "y.jsonl", [dict(reversed(list(r.items()))) for r in rows])
    assert (tmp_path / "x.jsonl").read_bytes() == (tmp_path / "y.jsonl").read_bytes()
    assert [r for _, r in iter_jsonl(tmp_path / "x.jsonl")] == rows
