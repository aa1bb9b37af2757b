import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mediafuse.core import BIAS3, FACT5, LabelScale
from mediafuse.errors import ShapeError
from mediafuse.evaluation import (
    COLUMNS,
    compute_metrics,
    confusion_matrix,
    majority_baseline,
    majority_class,
    middle_baseline,
    render_table,
)

L, C, R = 0, 1, 2
TWO = LabelScale("two", ("a", "b"))


def test_perfect_predictions():
    m = compute_metrics([0, 1, 2, 1], [0, 1, 2, 1], BIAS3)
    assert (m.mae, m.macro_f1, m.accuracy) == (0.0, 100.0, 100.0)


def test_all_center_predictions():
    m = compute_metrics([C, C, C], [L, C, R], BIAS3)
    assert m.mae == pytest.approx(2 / 3)
    assert round(m.accuracy, 2) == 33.33


def test_macro_f1_counts_absent_classes():
    m = compute_metrics([0, 1], [0, 0], TWO)
    assert round(m.macro_f1, 2) == 33.33
    assert m.macro_precision == pytest.approx(50.0)
    assert m.macro_recall == pytest.approx(25.0)


def test_length_mismatch():
    with pytest.raises(ShapeError):
        compute_metrics([0], [0, 1], BIAS3)


def test_confusion_matrix_layout():
    cm = confusion_matrix([0, 0, 2], [1, 0, 2], 3)
    assert cm.tolist() == [[1, 1, 0], [0, 0, 0], [0, 0, 1]]


def test_majority_baseline_examples():
    m = majority_baseline([C, C, L], [L, C, C, R], BIAS3)
    assert (m.accuracy, m.mae) == (50.0, 0.5)
    m = majority_baseline([R, R], [R, R, R], BIAS3)
    assert (m.accuracy, m.mae) == (100.0, 0.0)
    assert majority_class([0, 2, 2, 0], 3) == 0


def test_middle_baseline():
    assert middle_baseline([L, C, R], BIAS3).mae == pytest.approx(2 / 3)
    m = middle_baseline([2, 2], FACT5)
    assert m.accuracy == 100.0


@given(st.data())
def test_mae_moves_by_one_over_n(data):
    n = data.draw(st.integers(1, 30))
    truths = data.draw(st.lists(st.integers(0, 4), min_size=n, max_size=n))
    preds = list(truths)
    i = data.draw(st.integers(0, n - 1))
    step = 1 if truths[i] < 4 else -1
    preds[i] += step
    assert compute_metrics(preds, truths, FACT5).mae == pytest.approx(1 / n)


@given(st.data())
def test_metrics_invariant_to_sample_order(data):
    n = data.draw(st.integers(1, 40))
    truths = data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
    preds = data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
    perm = data.draw(st.permutations(range(n)))
    a = compute_metrics(preds, truths, BIAS3)
    b = compute_metrics([preds[i] for i in perm], [truths[i] for i in perm], BIAS3)
    assert a.macro_f1 == pytest.approx(b.macro_f1, abs=1e-12)
    assert a.mae == pytest.approx(b.mae, abs=1e-12)


def test_render_table_columns():
    m = compute_metrics([0, 1], [0, 1], BIAS3)
    text = render_table([("model", m)])
    header = text.splitlines()[0].split()
    assert header[1:] == ["MAE", "Macro-F1", "Accuracy", "Precision", "Recall"]
    assert tuple(header[1:]) == COLUMNS
    assert "100.00" in text.splitlines()[-1]


def test_metrics_ranges_random():
    rng = np.random.default_rng(0)
    for _ in range(50):
        t = rng.integers(0, 3, 20)
        p = rng.integers(0, 3, 20)
        m = compute_metrics(p, t, BIAS3)
        for v in (m.macro_f1, m.accuracy, m.macro_precision, m.macro_recall):
            assert 0 <= v <= 100
        assert np.sum(m.confusion) == 20
