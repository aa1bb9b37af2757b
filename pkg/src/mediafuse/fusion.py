"""Static fusion of per-view outlet embeddings.

Views are first projected to a common width ``d``.  Batched code paths
work on arrays shaped (N, 5, d) with a (N, 5) presence mask; the single
outlet helpers (``fuse_concat`` and friends) wrap those.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import VIEWS, EmbeddingTable, LabelScale, ViewId, get_scale
from .errors import ConfigError, DegenerateLabels, EmptyContext, InvalidConfig, ShapeError
from .numkit import Adam, DenseLayer, check_finite, make_rng, softmax, softmax_backward
from .numkit import checkpoint as ckpt

log = logging.getLogger(__name__)

STRATEGIES = ("concat-linear", "mlp", "self-attn", "cross-attn", "co-attn")
N_VIEWS = len(VIEWS)


# ---------------------------------------------------------------------------
# projection

@dataclass
class ViewBundle:
    """Projected views of one outlet, in ViewId order."""

    projected: np.ndarray
    missing: np.ndarray
    raw: dict = field(default_factory=dict)

    @property
    def d(self):
        return self.projected.shape[1]

    def view(self, v) -> np.ndarray:
        return self.projected[ViewId.parse(v)]


class ViewProjector:
    """One linear map per view onto the common width ``d``.

    A view whose native width already equals ``d`` starts from the identity;
    wider or narrower views start from a seeded Gaussian map scaled by
    ``1/sqrt(in_dim)``.

    ``fit_scaling`` standardizes each view's inputs with training-set
    statistics; unfitted views pass through unchanged.
    """

    def __init__(self, dims: Mapping, d=64, seed=0, layers=None):
        self.d = int(d)
        self.dims = {ViewId.parse(k): int(v) for k, v in dims.items()}
        self.shift = {v: np.zeros(n) for v, n in self.dims.items()}
        self.spread = {v: np.ones(n) for v, n in self.dims.items()}
        if layers is not None:
            self.layers = {ViewId.parse(k): v for k, v in layers.items()}
            return
        self.layers = {}
        for v in VIEWS:
            if v not in self.dims:
                continue
            n_in = self.dims[v]
            if n_in == self.d:
                w = np.eye(self.d)
            else:
                w = make_rng(seed, "projection", v.label).standard_normal((self.d, n_in)) / np.sqrt(n_in)
            self.layers[v] = DenseLayer(w, np.zeros(self.d), "identity")

    def fit_scaling(self, raw: Sequence, present: np.ndarray):
        for v in VIEWS:
            if v not in self.dims or raw[v] is None or not present[:, v].any():
                continue
            rows = np.asarray(raw[v], dtype=np.float64)[present[:, v]]
            std = rows.std(axis=0)
            self.shift[v] = rows.mean(axis=0)
            self.spread[v] = np.where(std > 1e-12, std, 1.0)
        return self

    def scaling_params(self):
        return [
            (f"scale.{v.label}.{n}", arr)
            for v in VIEWS
            if v in self.dims
            for n, arr in (("shift", self.shift[v]), ("spread", self.spread[v]))
        ]

    def params(self):
        return [p for v in VIEWS if v in self.layers for p in self.layers[v].params()]

    def named_params(self):
        return [
            (f"proj.{v.label}.{n}", p)
            for v in VIEWS
            if v in self.layers
            for n, p in zip(("weight", "bias"), self.layers[v].params())
        ]

    def forward(self, raw: Sequence, present: np.ndarray):
        """raw[k]: (N, dim_k) array or None; present: (N, 5) bool."""
        n = present.shape[0]
        out = np.zeros((n, N_VIEWS, self.d))
        self._cache = (raw, present)
        for v in VIEWS:
            x = raw[v]
            if x is None or not present[:, v].any():
                continue
            if v not in self.layers:
                raise ConfigError(f"view {v.label} has no declared dimension")
            x = (np.asarray(x, dtype=np.float64) - self.shift[v]) / self.spread[v]
            out[:, v, :] = self.layers[v].forward(x) * present[:, v, None]
        return out

    def backward(self, g):
        raw, present = self._cache
        grads = []
        for v in VIEWS:
            if v not in self.layers:
                continue
            layer = self.layers[v]
            x = raw[v]
            if x is None or not present[:, v].any():
                grads.extend([np.zeros_like(layer.weight), np.zeros_like(layer.bias)])
                continue
            gw, gb, _ = layer.backward(g[:, v, :] * present[:, v, None])
            grads.extend([gw, gb])
        return grads


def gather_views(tables: Mapping, domains: Sequence[str]):
    """Stack per-view tables for ``domains``: (list of arrays-or-None, present mask)."""
    raw = [None] * N_VIEWS
    present = np.zeros((len(domains), N_VIEWS), dtype=bool)
    for v in VIEWS:
        table = tables.get(v)
        if table is None:
            continue
        raw[v] = table.matrix(domains)
        present[:, v] = [d in table for d in domains]
    return raw, present


def project_views(raw: Mapping, projector: ViewProjector) -> ViewBundle:
    """Project one outlet's views; missing views become flagged zero rows."""
    vectors = [None] * N_VIEWS
    present = np.zeros((1, N_VIEWS), dtype=bool)
    clean = {}
    for key, vec in raw.items():
        v = ViewId.parse(key)
        if vec is None:
            continue
        vec = np.asarray(vec, dtype=np.float64)
        if v not in projector.dims:
            raise ConfigError(f"view {v.label} has no declared dimension")
        if vec.shape != (projector.dims[v],):
            raise ConfigError(f"view {v.label} has dim {vec.shape}, declared {projector.dims[v]}")
        vectors[v] = vec[None, :]
        present[0, v] = True
        clean[v] = vec
    projected = projector.forward(vectors, present)[0]
    return ViewBundle(check_finite(projected, "projected views"), ~present[0], clean)


def bundle_from_arrays(views: np.ndarray, missing=None) -> ViewBundle:
    views = np.asarray(views, dtype=np.float64)
    if views.ndim != 2 or views.shape[0] != N_VIEWS:
        raise ShapeError(f"expected ({N_VIEWS}, d) views, got {views.shape}")
    if missing is None:
        missing = np.zeros(N_VIEWS, dtype=bool)
    return ViewBundle(views, np.asarray(missing, dtype=bool))


# ---------------------------------------------------------------------------
# attention

class AttentionBlock:
    """Single-head scaled dot-product attention with biased q/k/v maps."""

    def __init__(self, wq, wk, wv, bq=None, bk=None, bv=None):
        self.wq, self.wk, self.wv = (np.asarray(w, dtype=np.float64) for w in (wq, wk, wv))
        d = self.wq.shape[0]
        for w in (self.wq, self.wk, self.wv):
            if w.shape != (d, d):
                raise ShapeError("attention weights must all be d x d")
        zero = np.zeros(d)
        self.bq = zero.copy() if bq is None else np.asarray(bq, dtype=np.float64)
        self.bk = zero.copy() if bk is None else np.asarray(bk, dtype=np.float64)
        self.bv = zero.copy() if bv is None else np.asarray(bv, dtype=np.float64)

    @classmethod
    def init(cls, d, rng):
        s = 1.0 / np.sqrt(d)
        return cls(*(rng.uniform(-s, s, size=(d, d)) for _ in range(3)))

    @property
    def d(self):
        return self.wq.shape[0]

    def params(self):
        return [self.wq, self.wk, self.wv, self.bq, self.bk, self.bv]

    names = ("wq", "wk", "wv", "bq", "bk", "bv")

    def forward(self, queries, keys):
        """queries (N, Tq, d), keys (N, Tk, d) -> attended (N, Tq, d)."""
        if queries.shape[-1] != self.d or keys.shape[-1] != self.d:
            raise ShapeError(f"attention tokens must have dim {self.d}")
        if keys.shape[1] == 0:
            raise EmptyContext("attention context is empty")
        q = queries @ self.wq.T + self.bq
        k = keys @ self.wk.T + self.bk
        v = keys @ self.wv.T + self.bv
        scores = q @ np.swapaxes(k, 1, 2) / np.sqrt(self.d)
        attn = softmax(scores, axis=-1)
        out = attn @ v
        self._cache = (queries, keys, q, k, v, attn)
        return out

    def backward(self, g_out):
        """Returns (param grads, grad queries, grad keys)."""
        queries, keys, q, k, v, attn = self._cache
        g_attn = g_out @ np.swapaxes(v, 1, 2)
        g_v = np.swapaxes(attn, 1, 2) @ g_out
        g_s = softmax_backward(attn, g_attn) / np.sqrt(self.d)
        g_q = g_s @ k
        g_k = np.swapaxes(g_s, 1, 2) @ q
        grads = [
            np.einsum("ntd,nte->de", g_q, queries),
            np.einsum("ntd,nte->de", g_k, keys),
            np.einsum("ntd,nte->de", g_v, keys),
            g_q.sum(axis=(0, 1)),
            g_k.sum(axis=(0, 1)),
            g_v.sum(axis=(0, 1)),
        ]
        g_queries = g_q @ self.wq
        g_keys = g_k @ self.wk + g_v @ self.wv
        return grads, g_queries, g_keys


def _as_tokens(x):
    x = np.asarray(x, dtype=np.float64)
    return x[None, :] if x.ndim == 1 else x


def fuse_concat(bundle: ViewBundle) -> np.ndarray:
    return np.asarray(bundle.projected, dtype=np.float64).reshape(-1).copy()


def fuse_mlp(bundle: ViewBundle, layer: DenseLayer) -> np.ndarray:
    x = fuse_concat(bundle)
    if layer.in_dim != x.size:
        raise ShapeError(f"MLP fusion layer expects {layer.in_dim} inputs, concat has {x.size}")
    return layer.forward(x)


def fuse_self_attention(bundle: ViewBundle, block: AttentionBlock) -> np.ndarray:
    tokens = bundle.projected[None, :, :]
    return block.forward(tokens, tokens)[0].mean(axis=0)


def fuse_cross_attention(query_view, context_views, block: AttentionBlock) -> np.ndarray:
    q = _as_tokens(query_view)
    c = np.asarray(context_views, dtype=np.float64)
    if c.size == 0:
        raise EmptyContext("cross-attention needs at least one context token")
    c = _as_tokens(c)
    return block.forward(q[None], c[None])[0].mean(axis=0)


def fuse_co_attention(a, b, block_ab: AttentionBlock, block_ba: AttentionBlock) -> np.ndarray:
    a, b = _as_tokens(a), _as_tokens(b)
    if a.shape[-1] != b.shape[-1]:
        raise ShapeError("co-attention tokens must share a dimension")
    return np.concatenate([fuse_cross_attention(a, b, block_ab), fuse_cross_attention(b, a, block_ba)])


# ---------------------------------------------------------------------------
# linear hinge classifier

@dataclass
class LinearClassifier:
    weight: np.ndarray
    bias: np.ndarray
    scale: LabelScale
    epochs_run: int = 0

    def margins(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.weight.shape[1]:
            raise ShapeError(f"classifier expects {self.weight.shape[1]} features, got {x.shape[-1]}")
        return x @ self.weight.T + self.bias

    def predict(self, x):
        return np.argmax(self.margins(x), axis=-1)

    def predict_proba(self, x):
        return softmax(self.margins(x), axis=-1)

    def named_params(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def to_checkpoint(self, extra=None):
        header = {"model": "linear", "scale": self.scale.name, "epochs_run": self.epochs_run}
        header.update(extra or {})
        return header, self.named_params()

    @classmethod
    def from_checkpoint(cls, header, params):
        return cls(params["weight"], params["bias"], get_scale(header["scale"]), header.get("epochs_run", 0))


def predict_proba(clf: LinearClassifier, x) -> np.ndarray:
    return clf.predict_proba(x)


def train_linear_classifier(
    x,
    y,
    scale: LabelScale,
    epochs=60,
    tol=0.01,
    learning_rate=0.01,
    reg=1e-4,
    seed=0,
) -> LinearClassifier:
    """Crammer-Singer multiclass hinge loss by per-sample subgradient steps.

    Runs at most ``epochs`` passes and stops once no parameter moved by
    ``tol`` or more over a whole pass.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or len(x) != len(y):
        raise ShapeError("x must be (n, features) with one label per row")
    c = len(scale)
    if len(np.unique(y)) < 2:
        raise DegenerateLabels("training labels contain a single class")
    if len(x) < c:
        raise DegenerateLabels(f"need at least {c} samples for {c} classes")
    if y.min() < 0 or y.max() >= c:
        raise ShapeError("labels outside the scale")
    w = np.zeros((c, x.shape[1]))
    b = np.zeros(c)
    rng = make_rng(seed, "linear-svm")
    run = 0
    for _ in range(epochs):
        w0, b0 = w.copy(), b.copy()
        for i in rng.permutation(len(x)):
            xi, yi = x[i], y[i]
            m = w @ xi + b
            m_other = m.copy()
            m_other[yi] = -np.inf
            r = int(np.argmax(m_other))
            w *= 1.0 - learning_rate * reg
            if 1.0 + m[r] - m[yi] > 0:
                w[yi] += learning_rate * xi
                b[yi] += learning_rate
                w[r] -= learning_rate * xi
                b[r] -= learning_rate
        run += 1
        delta = max(np.max(np.abs(w - w0)), np.max(np.abs(b - b0)))
        if delta < tol:
            break
    return LinearClassifier(check_finite(w, "classifier weight"), b, scale, run)


# ---------------------------------------------------------------------------
# jointly trained neural fusion

@dataclass(frozen=True)
class FusionConfig:
    strategy: str = "concat-linear"
    views: tuple = tuple(v.label for v in VIEWS)
    d: int = 64
    query_views: tuple = ("articles",)
    context_views: tuple = ("alexa", "hyperlink", "llm")
    hidden: int = 64
    epochs: int = 60
    learning_rate: float = 1e-3
    batch: int = 32
    svm_epochs: int = 60
    svm_tol: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InvalidConfig(f"unknown fusion strategy {self.strategy!r}; expected one of {STRATEGIES}")
        for name in self.views + self.query_views + self.context_views:
            ViewId.parse(name)
        object.__setattr__(self, "views", tuple(self.views))
        object.__setattr__(self, "query_views", tuple(self.query_views))
        object.__setattr__(self, "context_views", tuple(self.context_views))

    @property
    def view_ids(self):
        return tuple(sorted(ViewId.parse(v) for v in self.views))

    def as_dict(self):
        return dataclasses.asdict(self)


def _view_mask(config: FusionConfig):
    keep = np.zeros(N_VIEWS, dtype=bool)
    keep[list(config.view_ids)] = True
    return keep


class FusionModel:
    """Projection + fusion operator + softmax head, trained end to end."""

    def __init__(self, config: FusionConfig, projector: ViewProjector, n_classes: int, rng=None):
        self.config = config
        self.projector = projector
        self.n_classes = n_classes
        d = config.d
        rng = rng if rng is not None else make_rng(config.seed, "fusion-init", config.strategy)
        s = config.strategy
        self.mlp = None
        self.blocks = []
        if s == "mlp":
            self.mlp = DenseLayer.init(N_VIEWS * d, config.hidden, "relu", rng)
            out = config.hidden
        elif s == "self-attn":
            self.blocks = [AttentionBlock.init(d, rng)]
            out = d
        elif s == "cross-attn":
            self.blocks = [AttentionBlock.init(d, rng)]
            out = d
        elif s == "co-attn":
            self.blocks = [AttentionBlock.init(d, rng), AttentionBlock.init(d, rng)]
            out = 2 * d
        else:
            raise InvalidConfig(f"{s!r} is not a neural fusion strategy")
        self.q_idx = [ViewId.parse(v) for v in config.query_views]
        self.c_idx = [ViewId.parse(v) for v in config.context_views]
        if s in ("cross-attn", "co-attn") and (not self.q_idx or not self.c_idx):
            raise EmptyContext("cross/co-attention needs query and context views")
        self.head = DenseLayer.init(out, n_classes, "softmax", rng)
        self._keep = _view_mask(config)

    def params(self):
        ps = list(self.projector.params())
        if self.mlp is not None:
            ps += self.mlp.params()
        for b in self.blocks:
            ps += b.params()
        return ps + self.head.params()

    def named_params(self):
        out = list(self.projector.named_params())
        if self.mlp is not None:
            out += [("mlp.weight", self.mlp.weight), ("mlp.bias", self.mlp.bias)]
        for i, b in enumerate(self.blocks):
            out += [(f"attn{i}.{n}", p) for n, p in zip(AttentionBlock.names, b.params())]
        return out + [("head.weight", self.head.weight), ("head.bias", self.head.bias)]

    def fused(self, raw, present):
        present = present & self._keep[None, :]
        tokens = self.projector.forward(raw, present)
        self._present = present
        s = self.config.strategy
        n = tokens.shape[0]
        if s == "mlp":
            return self.mlp.forward(tokens.reshape(n, -1))
        if s == "self-attn":
            return self.blocks[0].forward(tokens, tokens).mean(axis=1)
        q, c = tokens[:, self.q_idx, :], tokens[:, self.c_idx, :]
        if s == "cross-attn":
            return self.blocks[0].forward(q, c).mean(axis=1)
        ab = self.blocks[0].forward(q, c).mean(axis=1)
        ba = self.blocks[1].forward(c, q).mean(axis=1)
        return np.concatenate([ab, ba], axis=1)

    def forward(self, raw, present):
        return self.head.forward(self.fused(raw, present))

    def backward(self, g_proba):
        s = self.config.strategy
        hw, hb, g = self.head.backward(g_proba)
        mid = []
        n = g.shape[0]
        d = self.config.d
        g_tokens = np.zeros((n, N_VIEWS, d))
        if s == "mlp":
            gw, gb, gx = self.mlp.backward(g)
            mid = [gw, gb]
            g_tokens = gx.reshape(n, N_VIEWS, d)
        elif s == "self-attn":
            nt = N_VIEWS
            grads, gq, gk = self.blocks[0].backward(np.repeat(g[:, None, :] / nt, nt, axis=1))
            mid = grads
            g_tokens = gq + gk
        elif s == "cross-attn":
            tq = len(self.q_idx)
            grads, gq, gc = self.blocks[0].backward(np.repeat(g[:, None, :] / tq, tq, axis=1))
            mid = grads
            np.add.at(g_tokens, (slice(None), self.q_idx), gq)
            np.add.at(g_tokens, (slice(None), self.c_idx), gc)
        else:
            tq, tc = len(self.q_idx), len(self.c_idx)
            g_ab, g_ba = g[:, :d], g[:, d:]
            # blocks[1] ran last, so its cache is intact; blocks[0] likewise has its own cache
            grads_ba, gc_q, gq_k = self.blocks[1].backward(np.repeat(g_ba[:, None, :] / tc, tc, axis=1))
            grads_ab, gq_q, gc_k = self.blocks[0].backward(np.repeat(g_ab[:, None, :] / tq, tq, axis=1))
            mid = grads_ab + grads_ba
            np.add.at(g_tokens, (slice(None), self.q_idx), gq_q + gq_k)
            np.add.at(g_tokens, (slice(None), self.c_idx), gc_k + gc_q)
        gp = self.projector.backward(g_tokens * self._present[:, :, None])
        return gp + mid + [hw, hb]

    def predict_proba(self, raw, present):
        return self.forward(raw, present)


def cross_entropy_grad(proba, y):
    n = len(y)
    loss = -np.mean(np.log(np.maximum(proba[np.arange(n), y], 1e-300)))
    g = np.zeros_like(proba)
    g[np.arange(n), y] = -1.0 / (n * np.maximum(proba[np.arange(n), y], 1e-300))
    return loss, g


def train_fusion_model(raw, present, y, scale: LabelScale, config: FusionConfig, projector: ViewProjector):
    y = np.asarray(y, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise DegenerateLabels("training labels contain a single class")
    model = FusionModel(config, projector, len(scale))
    opt = Adam(model.params(), config.learning_rate)
    rng = make_rng(config.seed, "fusion-train", config.strategy)
    n = len(y)
    for _ in range(config.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, config.batch):
            idx = perm[start:start + config.batch]
            sub = [None if r is None else r[idx] for r in raw]
            proba = model.forward(sub, present[idx])
            _, g = cross_entropy_grad(proba, y[idx])
            opt.step(model.backward(g))
    return model


class StaticFusion:
    """Uniform front end over the five static strategies."""

    def __init__(self, config: FusionConfig, scale: LabelScale, projector: ViewProjector, model=None, clf=None):
        self.config = config
        self.scale = scale
        self.projector = projector
        self.model = model
        self.clf = clf

    @classmethod
    def fit(cls, tables: Mapping, domains, y, scale: LabelScale, config: FusionConfig):
        dims = {v: t.dim for v, t in tables.items()}
        projector = ViewProjector(dims, config.d, seed=config.seed)
        raw, present = gather_views(tables, domains)
        projector.fit_scaling(raw, present)
        if config.strategy == "concat-linear":
            x = cls._concat(projector, raw, present, config)
            clf = train_linear_classifier(
                x, y, scale, epochs=config.svm_epochs, tol=config.svm_tol, seed=config.seed
            )
            return cls(config, scale, projector, clf=clf)
        model = train_fusion_model(raw, present, y, scale, config, projector)
        return cls(config, scale, projector, model=model)

    @staticmethod
    def _concat(projector, raw, present, config):
        present = present & _view_mask(config)[None, :]
        tokens = projector.forward(raw, present)
        return tokens.reshape(tokens.shape[0], -1)

    def predict_proba(self, tables: Mapping, domains):
        raw, present = gather_views(tables, domains)
        if self.clf is not None:
            return self.clf.predict_proba(self._concat(self.projector, raw, present, self.config))
        return self.model.predict_proba(raw, present)

    def save(self, path, extra=None):
        header = {
            "model": "fusion",
            "config": self.config.as_dict(),
            "scale": self.scale.name,
            "dims": {v.label: n for v, n in sorted(self.projector.dims.items())},
        }
        if self.clf is not None:
            named = self.projector.named_params() + [("clf." + n, p) for n, p in self.clf.named_params()]
            named += self.projector.scaling_params()
            header["epochs_run"] = self.clf.epochs_run
        else:
            named = self.model.named_params() + self.projector.scaling_params()
        header.update(extra or {})
        ckpt.save(path, header, named)
