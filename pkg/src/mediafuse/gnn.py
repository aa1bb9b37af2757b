"""Graph encoders trained without labels.

GraphConv, GraphSAGE (mean aggregator) and residual gated graph
convolutions, each with a hand-written backward pass, trained with an
edge-level negative-sampling objective.  All arrays are float64; message
passing goes through :mod:`mediafuse.numkit.kernels`.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import EmbeddingTable, ViewId
from .errors import InvalidConfig, NoPositivePairs, ShapeError
from .graph import MediaGraph, node_feature_matrix
from .numkit import Adam, check_finite, kernels, log_sigmoid, make_rng, sigmoid
from .numkit import checkpoint as ckpt
from .numkit.layers import glorot

log = logging.getLogger(__name__)

ENCODERS = ("graphconv", "sage", "resgated")


@dataclass(frozen=True)
class GnnConfig:
    encoder: str = "graphconv"
    epochs: int = 50
    layers: int = 4
    hidden: int = 128
    batch: int = 128
    learning_rate: float = 1e-4
    dropout: float = 0.5
    out_dim: int = 64
    negatives_per_positive: int = 5
    sample_size: int = 10
    features: str = "default"
    feature_dim: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.encoder not in ENCODERS:
            raise InvalidConfig(f"unknown encoder {self.encoder!r}; expected one of {ENCODERS}")
        if self.layers < 1 or self.epochs < 0 or self.batch < 1:
            raise InvalidConfig("layers >= 1, epochs >= 0 and batch >= 1 required")
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidConfig("dropout must lie in [0, 1)")


class GraphArrays:
    """Index arrays for one graph; every undirected edge appears both ways."""

    def __init__(self, n, src, dst, weight):
        self.n = int(n)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.weight = np.asarray(weight, dtype=np.float64)
        order = np.lexsort((self.src, self.dst))
        self._by_dst = order
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(self.indptr, self.dst + 1, 1)
        self.indptr = np.cumsum(self.indptr)
        self.neighbors = self.src[order]
        keys = self.dst * self.n + self.src
        self._keys = np.unique(keys)

    @classmethod
    def from_graph(cls, g: MediaGraph, order=None):
        order, src, dst, w = g.index_arrays(order)
        return order, cls(len(order), src, dst, w)

    @classmethod
    def from_edges(cls, n, pairs, weights=None):
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if weights is None:
            weights = np.ones(len(pairs))
        src = np.concatenate([pairs[:, 0], pairs[:, 1]])
        dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
        w = np.concatenate([weights, weights]).astype(np.float64)
        return cls(n, src, dst, w)

    def undirected_pairs(self):
        keep = self.src < self.dst
        return np.column_stack([self.src[keep], self.dst[keep]])

    def degree(self):
        return np.diff(self.indptr)

    def is_edge(self, u, v):
        keys = np.asarray(v) * self.n + np.asarray(u)
        pos = np.searchsorted(self._keys, keys)
        pos = np.minimum(pos, len(self._keys) - 1) if len(self._keys) else pos
        if not len(self._keys):
            return np.zeros(np.shape(keys), dtype=bool)
        return self._keys[pos] == keys

    def mean_arrays(self):
        """(src, dst, coef) averaging over the full neighborhood."""
        deg = self.degree().astype(np.float64)
        coef = 1.0 / deg[self.dst]
        return self.src, self.dst, coef

    def sample_mean_arrays(self, rng, size):
        """(src, dst, coef) averaging over at most ``size`` sampled neighbors."""
        deg = self.degree()
        src_parts, dst_parts = [], []
        for v in range(self.n):
            lo, hi = self.indptr[v], self.indptr[v + 1]
            neigh = self.neighbors[lo:hi]
            if deg[v] > size:
                neigh = np.sort(rng.choice(neigh, size=size, replace=False))
            src_parts.append(neigh)
            dst_parts.append(np.full(len(neigh), v, dtype=np.int64))
        src = np.concatenate(src_parts) if src_parts else np.zeros(0, dtype=np.int64)
        dst = np.concatenate(dst_parts) if dst_parts else np.zeros(0, dtype=np.int64)
        counts = np.bincount(dst, minlength=self.n).astype(np.float64)
        coef = 1.0 / counts[dst] if len(dst) else np.zeros(0)
        return src, dst, coef


def _relu_back(z, g):
    return g * (z > 0)


class GraphConvLayer:
    """h'_v = W1 h_v + W2 sum_u w_uv h_u, no bias."""

    def __init__(self, w1, w2, activation="relu"):
        self.w1 = np.asarray(w1, dtype=np.float64)
        self.w2 = np.asarray(w2, dtype=np.float64)
        if self.w1.shape != self.w2.shape:
            raise ShapeError("W1 and W2 must share a shape")
        self.activation = activation

    @classmethod
    def init(cls, in_dim, out_dim, rng, activation="relu"):
        return cls(glorot(rng, out_dim, in_dim), glorot(rng, out_dim, in_dim), activation)

    def params(self):
        return [self.w1, self.w2]

    def names(self):
        return ["w1", "w2"]

    def forward(self, h, ga: GraphArrays, ctx=None):
        if h.shape[1] != self.w1.shape[1]:
            raise ShapeError(f"input dim {h.shape[1]} != layer in_dim {self.w1.shape[1]}")
        agg = kernels.edge_aggregate(h, ga.src, ga.dst, ga.weight, ga.n)
        z = h @ self.w1.T + agg @ self.w2.T
        y = np.maximum(z, 0.0) if self.activation == "relu" else z
        self._cache = (h, agg, z, ga)
        return y

    def backward(self, gy):
        h, agg, z, ga = self._cache
        gz = _relu_back(z, gy) if self.activation == "relu" else gy
        gw1 = gz.T @ h
        gw2 = gz.T @ agg
        gagg = gz @ self.w2
        gh = gz @ self.w1 + kernels.edge_aggregate(gagg, ga.dst, ga.src, ga.weight, ga.n)
        return [gw1, gw2], gh


def graphconv_layer(h, ga, w1, w2, activation="identity"):
    return GraphConvLayer(w1, w2, activation).forward(np.asarray(h, dtype=np.float64), ga)


class SageLayer:
    """h'_v = W_self h_v + W_neigh mean_{u in N(v)} h_u, optional L2 output."""

    def __init__(self, w_self, w_neigh, activation="relu", normalize=False):
        self.w_self = np.asarray(w_self, dtype=np.float64)
        self.w_neigh = np.asarray(w_neigh, dtype=np.float64)
        if self.w_self.shape != self.w_neigh.shape:
            raise ShapeError("W_self and W_neigh must share a shape")
        self.activation = activation
        self.normalize = normalize

    @classmethod
    def init(cls, in_dim, out_dim, rng, activation="relu", normalize=False):
        return cls(glorot(rng, out_dim, in_dim), glorot(rng, out_dim, in_dim), activation, normalize)

    def params(self):
        return [self.w_self, self.w_neigh]

    def names(self):
        return ["w_self", "w_neigh"]

    def forward(self, h, ga: GraphArrays, ctx=None):
        if h.shape[1] != self.w_self.shape[1]:
            raise ShapeError(f"input dim {h.shape[1]} != layer in_dim {self.w_self.shape[1]}")
        src, dst, coef = ctx if ctx is not None else ga.mean_arrays()
        mean = kernels.edge_aggregate(h, src, dst, coef, ga.n)
        z = h @ self.w_self.T + mean @ self.w_neigh.T
        a = np.maximum(z, 0.0) if self.activation == "relu" else z
        if self.normalize:
            norm = np.maximum(np.linalg.norm(a, axis=1, keepdims=True), 1e-12)
            y = a / norm
        else:
            norm = None
            y = a
        self._cache = (h, mean, z, y, norm, (src, dst, coef), ga.n)
        return y

    def backward(self, gy):
        h, mean, z, y, norm, (src, dst, coef), n = self._cache
        if self.normalize:
            ga_ = (gy - y * np.sum(y * gy, axis=1, keepdims=True)) / norm
        else:
            ga_ = gy
        gz = _relu_back(z, ga_) if self.activation == "relu" else ga_
        gws = gz.T @ h
        gwn = gz.T @ mean
        gmean = gz @ self.w_neigh
        gh = gz @ self.w_self + kernels.edge_aggregate(gmean, dst, src, coef, n)
        return [gws, gwn], gh


def sage_layer(h, ga, w_self, w_neigh, activation="identity", normalize=False, ctx=None):
    return SageLayer(w_self, w_neigh, activation, normalize).forward(np.asarray(h, dtype=np.float64), ga, ctx)


class ResGatedLayer:
    """h'_v = h_v + relu(W1 h_v + sum_u eta_uv * (W2 h_u)),
    eta_uv = sigmoid(W3 h_v + W4 h_u)."""

    def __init__(self, ws, bs=None):
        self.ws = [np.asarray(w, dtype=np.float64) for w in ws]
        if len(self.ws) != 4:
            raise ShapeError("resgated layer needs four weight matrices")
        d = self.ws[0].shape[0]
        for w in self.ws:
            if w.shape != (d, d):
                raise ShapeError("resgated weights must be square and equal-sized (residual)")
        if bs is None:
            bs = [np.zeros(d) for _ in range(4)]
        self.bs = [np.asarray(b, dtype=np.float64) for b in bs]

    @classmethod
    def init(cls, dim, rng):
        return cls([glorot(rng, dim, dim) for _ in range(4)])

    def params(self):
        return self.ws + self.bs

    def names(self):
        return ["w1", "w2", "w3", "w4", "b1", "b2", "b3", "b4"]

    def forward(self, h, ga: GraphArrays, ctx=None):
        if h.shape[1] != self.ws[0].shape[1]:
            raise ShapeError(f"residual needs input dim {self.ws[0].shape[1]}, got {h.shape[1]}")
        p = [h @ w.T + b for w, b in zip(self.ws, self.bs)]
        gate = sigmoid(p[2][ga.dst] + p[3][ga.src])
        msg = gate * p[1][ga.src]
        agg = kernels.scatter_add_rows(msg, ga.dst, ga.n)
        z = p[0] + agg
        y = h + np.maximum(z, 0.0)
        self._cache = (h, p, gate, z, ga)
        return y

    def backward(self, gy):
        h, p, gate, z, ga = self._cache
        gz = _relu_back(z, gy)
        gmsg = gz[ga.dst]
        ggate = gmsg * p[1][ga.src]
        gpre = ggate * gate * (1.0 - gate)
        gp = [
            gz,
            kernels.scatter_add_rows(gmsg * gate, ga.src, ga.n),
            kernels.scatter_add_rows(gpre, ga.dst, ga.n),
            kernels.scatter_add_rows(gpre, ga.src, ga.n),
        ]
        gh = gy.copy()
        gws, gbs = [], []
        for w, g in zip(self.ws, gp):
            gws.append(g.T @ h)
            gbs.append(g.sum(axis=0))
            gh += g @ w
        return gws + gbs, gh


def resgated_layer(h, ga, w1, w2, w3, w4, biases=None):
    return ResGatedLayer([w1, w2, w3, w4], biases).forward(np.asarray(h, dtype=np.float64), ga)


class _Linear:
    """Bias-free projection used around the resgated stack."""

    def __init__(self, w, activation="identity"):
        self.w = np.asarray(w, dtype=np.float64)
        self.activation = activation

    def params(self):
        return [self.w]

    def names(self):
        return ["w"]

    def forward(self, h, ga=None, ctx=None):
        z = h @ self.w.T
        self._cache = (h, z)
        return np.maximum(z, 0.0) if self.activation == "relu" else z

    def backward(self, gy):
        h, z = self._cache
        gz = _relu_back(z, gy) if self.activation == "relu" else gy
        return [gz.T @ h], gz @ self.w


class GnnModel:
    """A stack of message-passing layers ending in an ``out_dim`` projection.

    graphconv / sage: ``layers`` message-passing layers, widths
    in -> hidden -> ... -> out_dim.  resgated: a relu input projection to
    ``hidden``, ``layers`` residual gated layers, then a linear map to
    ``out_dim``.
    """

    def __init__(self, config: GnnConfig, input_dim: int, blocks):
        self.config = config
        self.input_dim = int(input_dim)
        self.blocks = list(blocks)

    @classmethod
    def init(cls, config: GnnConfig, input_dim: int):
        rng = make_rng(config.seed, "gnn-init", config.encoder)
        c = config
        blocks = []
        if c.encoder in ("graphconv", "sage"):
            dims = [input_dim] + [c.hidden] * (c.layers - 1) + [c.out_dim]
            for i in range(c.layers):
                last = i == c.layers - 1
                act = "identity" if last else "relu"
                if c.encoder == "graphconv":
                    blocks.append(GraphConvLayer.init(dims[i], dims[i + 1], rng, act))
                else:
                    blocks.append(SageLayer.init(dims[i], dims[i + 1], rng, act, normalize=last))
        else:
            blocks.append(_Linear(glorot(rng, c.hidden, input_dim), "relu"))
            for _ in range(c.layers):
                blocks.append(ResGatedLayer.init(c.hidden, rng))
            blocks.append(_Linear(glorot(rng, c.out_dim, c.hidden)))
        return cls(config, input_dim, blocks)

    def params(self):
        return [p for b in self.blocks for p in b.params()]

    def named_params(self):
        out = []
        for i, b in enumerate(self.blocks):
            for name, p in zip(b.names(), b.params()):
                out.append((f"block{i}.{name}", p))
        return out

    def forward(self, x, ga: GraphArrays, rng=None, sage_ctx=None):
        """Full-graph forward pass; dropout is applied only when ``rng`` is given."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (ga.n, self.input_dim):
            raise ShapeError(f"features have shape {x.shape}, expected ({ga.n}, {self.input_dim})")
        p = self.config.dropout
        self._masks = []
        h = x
        last = len(self.blocks) - 1
        for i, block in enumerate(self.blocks):
            h = block.forward(h, ga, sage_ctx if isinstance(block, SageLayer) else None)
            mask = None
            if rng is not None and p > 0 and i < last and self._drops_after(i):
                mask = (rng.random(h.shape) >= p) / (1.0 - p)
                h = h * mask
            self._masks.append(mask)
        return check_finite(h, "GNN output")

    def _drops_after(self, i):
        # resgated: no dropout between the last gated layer and the output map
        if self.config.encoder == "resgated":
            return i < len(self.blocks) - 2
        return True

    def backward(self, gz):
        grads_rev = []
        g = gz
        for block, mask in zip(reversed(self.blocks), reversed(self._masks)):
            if mask is not None:
                g = g * mask
            gp, g = block.backward(g)
            grads_rev.append(gp)
        return [x for gp in reversed(grads_rev) for x in gp]

    def to_checkpoint(self):
        header = {
            "model": "gnn",
            "config": dataclasses.asdict(self.config),
            "input_dim": self.input_dim,
            "seed": self.config.seed,
        }
        return header, self.named_params()

    def save(self, path):
        header, named = self.to_checkpoint()
        ckpt.save(path, header, named)

    @classmethod
    def load(cls, path):
        header, params = ckpt.load(path)
        if header.get("model") != "gnn":
            raise InvalidConfig(f"{path} is not a GNN checkpoint")
        model = cls.init(GnnConfig(**header["config"]), header["input_dim"])
        for name, p in model.named_params():
            p[...] = params[name]
        return model


# ---------------------------------------------------------------------------
# objective

def sample_negatives(ga: GraphArrays, anchors, q, rng):
    """Uniform non-neighbors (excluding the anchor itself); -1 when none exist."""
    anchors = np.asarray(anchors, dtype=np.int64)
    out = np.full((len(anchors), q), -1, dtype=np.int64)
    if q == 0 or len(anchors) == 0:
        return out
    deg = ga.degree()
    possible = (ga.n - 1 - deg[anchors]) > 0
    todo = np.zeros_like(out, dtype=bool)
    todo[possible] = True
    base = np.repeat(anchors[:, None], q, axis=1)
    for _ in range(1000):
        idx = np.nonzero(todo)
        if len(idx[0]) == 0:
            break
        cand = rng.integers(0, ga.n, size=len(idx[0]))
        u = base[idx]
        ok = (cand != u) & ~ga.is_edge(u, cand)
        rows, cols = idx[0][ok], idx[1][ok]
        out[rows, cols] = cand[ok]
        todo[rows, cols] = False
    return out


def contrastive_loss_and_grad(z, pairs, negatives):
    """Mean over pairs of -log s(z_u.z_v) - sum_k log s(-z_u.z_n_k).

    Negative slots holding -1 are skipped.  Returns (loss, dL/dz).
    """
    z = np.asarray(z, dtype=np.float64)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    negatives = np.asarray(negatives, dtype=np.int64).reshape(len(pairs), -1)
    b = len(pairs)
    if b == 0:
        raise NoPositivePairs("no positive pairs in batch")
    u, v = pairs[:, 0], pairs[:, 1]
    zu, zv = z[u], z[v]
    pos = np.sum(zu * zv, axis=1)
    valid = negatives >= 0
    nidx = np.where(valid, negatives, 0)
    zn = z[nidx]
    neg = np.einsum("bd,bqd->bq", zu, zn)
    loss = -np.sum(log_sigmoid(pos)) - np.sum(np.where(valid, log_sigmoid(-neg), 0.0))
    loss /= b

    # d/dx -log s(x) = s(x) - 1 ; d/dx -log s(-x) = s(x)
    gpos = (sigmoid(pos) - 1.0) / b
    gneg = np.where(valid, sigmoid(neg), 0.0) / b
    gz_u = gpos[:, None] * zv + np.einsum("bq,bqd->bd", gneg, zn)
    gz_v = gpos[:, None] * zu
    gz_n = gneg[:, :, None] * zu[:, None, :]
    grad = kernels.scatter_add_rows(gz_u, u, z.shape[0])
    grad += kernels.scatter_add_rows(gz_v, v, z.shape[0])
    flat_n = nidx.reshape(-1)
    grad += kernels.scatter_add_rows(gz_n.reshape(-1, z.shape[1]), flat_n, z.shape[0])
    return float(loss), grad


def contrastive_loss(z, ga: GraphArrays, rng, q=5, pairs=None):
    """Loss over ``pairs`` (default: every edge) with freshly sampled negatives."""
    if pairs is None:
        pairs = ga.undirected_pairs()
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(pairs) == 0:
        raise NoPositivePairs("graph has no edges")
    negatives = sample_negatives(ga, pairs[:, 0], q, rng)
    return contrastive_loss_and_grad(z, pairs, negatives)[0]


# ---------------------------------------------------------------------------
# training / inference

def _features(g, order, config):
    return node_feature_matrix(g, order, mode=config.features, seed=config.seed, dim=config.feature_dim)


def train_gnn_arrays(x, ga: GraphArrays, config: GnnConfig, history=None):
    """Train on raw arrays; returns the model.  ``history`` collects epoch losses."""
    pairs_all = ga.undirected_pairs()
    if len(pairs_all) == 0:
        raise NoPositivePairs("cannot train a contrastive encoder on a graph without edges")
    model = GnnModel.init(config, x.shape[1])
    opt = Adam(model.params(), config.learning_rate)
    rng = make_rng(config.seed, "gnn-train", config.encoder)
    for epoch in range(config.epochs):
        sage_ctx = ga.sample_mean_arrays(rng, config.sample_size) if config.encoder == "sage" else None
        perm = rng.permutation(len(pairs_all))
        flip = rng.random(len(pairs_all)) < 0.5
        pairs = pairs_all[perm]
        pairs = np.where(flip[:, None], pairs[:, ::-1], pairs)
        total = 0.0
        for start in range(0, len(pairs), config.batch):
            batch = pairs[start:start + config.batch]
            z = model.forward(x, ga, rng=rng, sage_ctx=sage_ctx)
            negatives = sample_negatives(ga, batch[:, 0], config.negatives_per_positive, rng)
            loss, gz = contrastive_loss_and_grad(z, batch, negatives)
            opt.step(model.backward(gz))
            total += loss * len(batch)
        mean_loss = total / len(pairs)
        if history is not None:
            history.append(mean_loss)
        log.debug("epoch %d loss %.6f", epoch, mean_loss)
    return model


def train_gnn(g: MediaGraph, config: GnnConfig, history=None):
    order, ga = GraphArrays.from_graph(g)
    if not order:
        raise NoPositivePairs("empty graph")
    x = _features(g, order, config)
    return train_gnn_arrays(x, ga, config, history)


def embed_arrays(model: GnnModel, x, ga: GraphArrays):
    return model.forward(x, ga)


def embed_outlets(model: GnnModel, g: MediaGraph, outlets: Sequence[str], view=ViewId.ALEXA):
    """Dropout-free forward pass; returns (table, missing domains).

    Outlets absent from the graph get a zero row and are listed as missing.
    """
    order, ga = GraphArrays.from_graph(g)
    pos = {d: i for i, d in enumerate(order)}
    if order:
        z = model.forward(_features(g, order, model.config), ga)
    else:
        z = np.zeros((0, model.config.out_dim))
    rows = {}
    missing = []
    for d in outlets:
        i = pos.get(d)
        if i is None:
            missing.append(d)
            rows[d] = np.zeros(model.config.out_dim)
        else:
            rows[d] = z[i]
    return EmbeddingTable(view, model.config.out_dim, rows), missing
