"""Hot inner loops, in two interchangeable flavours.

Each kernel exists as a numba ``@njit`` function and as a plain numpy
function.  The compiled path is used when numba imports and the
``MEDIAFUSE_NUMBA`` environment variable is not ``0``; otherwise the numpy
path runs.  Both accumulate in the same element order, so their float64
results agree bit for bit.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _wanted():
    flag = os.environ.get("MEDIAFUSE_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _wanted()


# ---------------------------------------------------------------------------
# numpy reference path

def scatter_add_rows_np(values, index, n_rows):
    """out[index[e]] += values[e] for every row e."""
    out = np.zeros((n_rows, values.shape[1]), dtype=np.float64)
    np.add.at(out, index, values)
    return out


def edge_aggregate_np(h, src, dst, weight, n_rows):
    """out[dst[e]] += weight[e] * h[src[e]]."""
    out = np.zeros((n_rows, h.shape[1]), dtype=np.float64)
    np.add.at(out, dst, h[src] * weight[:, None])
    return out


def components_np(n, src, dst):
    """Connected-component label per node via union-find (path halving)."""
    parent = np.arange(n, dtype=np.int64)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in zip(src.tolist(), dst.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    return np.array([find(i) for i in range(n)], dtype=np.int64)


def confusion_counts_np(truth, pred, n_classes):
    out = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(out, (truth, pred), 1)
    return out


# ---------------------------------------------------------------------------
# numba path

if numba is not None:

    @numba.njit(cache=True)
    def scatter_add_rows_nb(values, index, n_rows):
        out = np.zeros((n_rows, values.shape[1]), dtype=np.float64)
        for e in range(values.shape[0]):
            r = index[e]
            for j in range(values.shape[1]):
                out[r, j] += values[e, j]
        return out

    @numba.njit(cache=True)
    def edge_aggregate_nb(h, src, dst, weight, n_rows):
        out = np.zeros((n_rows, h.shape[1]), dtype=np.float64)
        for e in range(src.shape[0]):
            s = src[e]
            d = dst[e]
            w = weight[e]
            for j in range(h.shape[1]):
                out[d, j] += h[s, j] * w
        return out

    @numba.njit(cache=True)
    def _find(parent, x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    @numba.njit(cache=True)
    def components_nb(n, src, dst):
        parent = np.arange(n)
        for e in range(src.shape[0]):
            ra = _find(parent, src[e])
            rb = _find(parent, dst[e])
            if ra != rb:
                if ra < rb:
                    parent[rb] = ra
                else:
                    parent[ra] = rb
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            out[i] = _find(parent, i)
        return out

    @numba.njit(cache=True)
    def confusion_counts_nb(truth, pred, n_classes):
        out = np.zeros((n_classes, n_classes), dtype=np.int64)
        for i in range(truth.shape[0]):
            out[truth[i], pred[i]] += 1
        return out


def _pick(name):
    if USE_NUMBA:
        return globals()[name + "_nb"]
    return globals()[name + "_np"]


_scatter = _pick("scatter_add_rows")
_aggregate = _pick("edge_aggregate")
_components = _pick("components")
_confusion = _pick("confusion_counts")


def scatter_add_rows(values, index, n_rows):
    values = np.ascontiguousarray(values, dtype=np.float64)
    index = np.ascontiguousarray(index, dtype=np.int64)
    return _scatter(values, index, int(n_rows))


def edge_aggregate(h, src, dst, weight, n_rows):
    h = np.ascontiguousarray(h, dtype=np.float64)
    return _aggregate(
        h,
        np.ascontiguousarray(src, dtype=np.int64),
        np.ascontiguousarray(dst, dtype=np.int64),
        np.ascontiguousarray(weight, dtype=np.float64),
        int(n_rows),
    )


def connected_components(n, src, dst):
    return _components(
        int(n),
        np.ascontiguousarray(src, dtype=np.int64),
        np.ascontiguousarray(dst, dtype=np.int64),
    )


def confusion_counts(truth, pred, n_classes):
    return _confusion(
        np.ascontiguousarray(truth, dtype=np.int64),
        np.ascontiguousarray(pred, dtype=np.int64),
        int(n_classes),
    )


def backend():
    return "numba" if USE_NUMBA else "numpy"
