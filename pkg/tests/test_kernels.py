import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mediafuse.numkit import kernels

pytestmark = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")


def _edges(rng, n, m):
    src = rng.integers(0, n, m).astype(np.int64)
    dst = rng.integers(0, n, m).astype(np.int64)
    return src, dst


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(0, 120), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_edge_aggregate_backends_match(n, m, d, seed):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((n, d))
    src, dst = _edges(rng, n, m)
    w = rng.random(m)
    a = kernels.edge_aggregate_np(h, src, dst, w, n)
    b = kernels.edge_aggregate_nb(h, src, dst, w, n)
    np.testing.assert_array_equal(a, b)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(0, 120), st.integers(0, 2**32 - 1))
def test_scatter_add_backends_match(n, m, seed):
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((m, 3))
    index = rng.integers(0, n, m).astype(np.int64)
    np.testing.assert_array_equal(
        kernels.scatter_add_rows_np(values, index, n), kernels.scatter_add_rows_nb(values, index, n)
    )


def _bfs_components(n, src, dst):
    adj = [[] for _ in range(n)]
    for a, b in zip(src, dst):
        adj[a].append(b)
        adj[b].append(a)
    label = [-1] * n
    for s in range(n):
        if label[s] >= 0:
            continue
        stack = [s]
        label[s] = s
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if label[v] < 0:
                    label[v] = s
                    stack.append(v)
    return np.array(label)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 300), st.integers(0, 400), st.integers(0, 2**32 - 1))
def test_components_match_bfs(n, m, seed):
    rng = np.random.default_rng(seed)
    src, dst = _edges(rng, n, m)
    expected = _bfs_components(n, src, dst)
    for fn in (kernels.components_np, kernels.components_nb):
        got = fn(n, src, dst)
        # BFS from the lowest unvisited index labels each component by its minimum node
        np.testing.assert_array_equal(got, expected)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 60), st.integers(0, 2**32 - 1))
def test_confusion_backends_match(c, n, seed):
    rng = np.random.default_rng(seed)
    t = rng.integers(0, c, n).astype(np.int64)
    p = rng.integers(0, c, n).astype(np.int64)
    np.testing.assert_array_equal(kernels.confusion_counts_np(t, p, c), kernels.confusion_counts_nb(t, p, c))


def test_backend_reports_choice():
    assert kernels.backend() in ("numba", "numpy")
