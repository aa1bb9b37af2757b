import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from mediafuse.core import BIAS3, LabelScale
from mediafuse.ensemble import PredictionSet, ensemble_outputs, hard_vote, outlet_aggregate, soft_vote, vote
from mediafuse.errors import NoPredictions, ShapeError

TWO = LabelScale("two", ("a", "b"))
A = [0.9, 0.1]
B = [0.2, 0.8]


def test_hard_vote():
    assert hard_vote([A, A, B], TWO) == 0
    assert hard_vote([B, A], TWO) == 0
    assert hard_vote([B], TWO) == 1
    with pytest.raises(NoPredictions):
        hard_vote([], TWO)


def test_soft_vote():
    idx, p = soft_vote([[0.6, 0.4], [0.4, 0.6]], TWO)
    assert idx == 0 and np.allclose(p, [0.5, 0.5])
    idx, p = soft_vote([A, B], TWO)
    assert idx == 0 and np.allclose(p, [0.55, 0.45])
    idx, p = soft_vote([B, B], TWO)
    assert idx == 1 and np.allclose(p, B)


def test_probability_vectors_validated():
    with pytest.raises(ShapeError):
        soft_vote([[-0.1, 1.1]], TWO)
    with pytest.raises(ShapeError):
        PredictionSet("outlet", TWO, [("x", [0.5, 0.6])])
    with pytest.raises(ShapeError):
        PredictionSet("article", TWO, [("x", [1.0, 0.0, 0.0])])


def test_hard_mode_reports_one_hot():
    idx, p = vote([A, B, B], TWO, "hard")
    assert idx == 1 and p.tolist() == [0.0, 1.0]


def test_outlet_aggregate_groups_and_reports_missing():
    rows = [("b.com", np.array([0.1, 0.2, 0.7]))] + [("a.com", np.array([0.5, 0.3, 0.2]))] * 5
    result, missing = outlet_aggregate(rows, BIAS3, "soft", outlets=["a.com", "b.com", "c.com"])
    assert [d for d, _ in result.items] == ["a.com", "b.com"]
    assert np.allclose(result.items[1][1], [0.1, 0.2, 0.7])
    assert missing == ["c.com"]


def test_ensemble_outputs():
    out = ensemble_outputs([{"a.com": np.array(A)}, {"a.com": np.array(B)}], TWO)
    assert np.allclose(out.items[0][1], [0.55, 0.45])


probs = st.lists(st.floats(0.01, 1.0), min_size=3, max_size=3).map(lambda v: np.array(v) / np.sum(v))


@given(st.lists(probs, min_size=1, max_size=12))
def test_hard_vote_duplication_invariant(preds):
    assert hard_vote(preds, BIAS3) == hard_vote(preds + preds, BIAS3)


@given(st.lists(probs, min_size=1, max_size=12), st.floats(0.1, 10.0))
def test_soft_vote_scale_invariant(preds, k):
    idx, mean = soft_vote(preds, BIAS3)
    top2 = np.sort(mean)[-2:]
    assume(top2[1] - top2[0] > 1e-9)
    assert soft_vote([p * k for p in preds], BIAS3)[0] == idx


@given(probs, st.integers(1, 6))
def test_identical_articles_pass_through(p, n):
    result, _ = outlet_aggregate([("x.com", p)] * n, BIAS3, "soft")
    assert np.allclose(result.items[0][1], p, atol=1e-12)
