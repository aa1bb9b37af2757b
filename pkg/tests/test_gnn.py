import math

import numpy as np
import pytest

from mediafuse.core import ViewId
from mediafuse.errors import NoPositivePairs, ShapeError
from mediafuse.gnn import (
    GnnConfig,
    GnnModel,
    GraphArrays,
    GraphConvLayer,
    ResGatedLayer,
    SageLayer,
    contrastive_loss,
    contrastive_loss_and_grad,
    embed_outlets,
    graphconv_layer,
    resgated_layer,
    sage_layer,
    sample_negatives,
    train_gnn,
    train_gnn_arrays,
)
from mediafuse.graph import MediaGraph
from mediafuse.numkit import flatten, grad_check, unflatten_into
from mediafuse.synth import sbm, sbm_graph

I2 = np.eye(2)
H = np.array([[1.0, 0.0], [0.0, 1.0]])


def pair_graph():
    return GraphArrays.from_edges(2, [(0, 1)])


def test_graphconv_examples():
    np.testing.assert_array_equal(graphconv_layer(H, pair_graph(), I2, I2), [[1, 1], [1, 1]])
    lonely = GraphArrays.from_edges(1, np.zeros((0, 2)))
    w1 = np.array([[2.0, 0.0], [1.0, 1.0]])
    np.testing.assert_array_equal(graphconv_layer([[1.0, 3.0]], lonely, w1, np.ones((2, 2))), [[2.0, 4.0]])
    zero = graphconv_layer(np.zeros((2, 2)), pair_graph(), np.ones((2, 2)), np.ones((2, 2)))
    assert not zero.any()


def test_graphconv_uses_edge_weights():
    ga = GraphArrays.from_edges(2, [(0, 1)], weights=[3.0])
    out = graphconv_layer(H, ga, np.zeros((2, 2)), I2)
    np.testing.assert_array_equal(out, [[0, 3], [3, 0]])


def test_sage_examples():
    np.testing.assert_array_equal(sage_layer(H, pair_graph(), I2, I2), [[1, 1], [1, 1]])
    normed = sage_layer(H, pair_graph(), I2, I2, normalize=True)
    np.testing.assert_allclose(np.linalg.norm(normed, axis=1), 1.0)
    lonely = GraphArrays.from_edges(1, np.zeros((0, 2)))
    np.testing.assert_array_equal(sage_layer([[1.0, 3.0]], lonely, I2 * 2, np.ones((2, 2))), [[2.0, 6.0]])


def test_sage_sampling_identity_for_small_neighborhoods():
    rng = np.random.default_rng(0)
    _, pairs = sbm(30, 0.2, 0.02, seed=1)
    ga = GraphArrays.from_edges(30, pairs)
    assert ga.degree().max() <= 10
    src, dst, coef = ga.sample_mean_arrays(rng, 10)
    full = ga.mean_arrays()
    key = lambda s, d: sorted(zip(d.tolist(), s.tolist()))  # noqa: E731
    assert key(src, dst) == key(full[0], full[1])
    big = GraphArrays.from_edges(15, [(0, j) for j in range(1, 15)])
    src, dst, coef = big.sample_mean_arrays(rng, 10)
    assert np.sum(dst == 0) == 10 and np.allclose(coef[dst == 0], 0.1)


def test_resgated_examples():
    ga = pair_graph()
    rng = np.random.default_rng(2)
    ws = [rng.standard_normal((2, 2)) for _ in range(4)]
    assert not resgated_layer(np.zeros((2, 2)), ga, *ws).any()
    lonely = GraphArrays.from_edges(1, np.zeros((0, 2)))
    h = np.array([[0.3, -0.7]])
    np.testing.assert_array_equal(resgated_layer(h, lonely, np.zeros((2, 2)), *ws[1:]), h)
    with pytest.raises(ShapeError):
        resgated_layer(np.zeros((2, 3)), ga, *ws)


def test_resgated_matches_scalar_evaluation():
    rng = np.random.default_rng(5)
    d = 3
    ws = [rng.normal(scale=0.3, size=(d, d)) for _ in range(4)]
    bs = [rng.normal(scale=0.1, size=d) for _ in range(4)]
    h = rng.standard_normal((2, d))
    out = resgated_layer(h, pair_graph(), *ws, biases=bs)
    for v, u in ((0, 1), (1, 0)):
        for i in range(d):
            lin = [sum(ws[k][i, j] * h[x, j] for j in range(d)) + bs[k][i] for k, x in ((0, v), (1, u), (2, v), (3, u))]
            gate = 1.0 / (1.0 + math.exp(-(lin[2] + lin[3])))
            expected = h[v, i] + max(0.0, lin[0] + gate * lin[1])
            assert out[v, i] == pytest.approx(expected, abs=1e-12)


def _random_graph(rng, n=5):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
    w = rng.integers(1, 3, size=len(pairs)).astype(float)
    return GraphArrays.from_edges(n, np.array(pairs, dtype=np.int64).reshape(-1, 2), w)


def _layer_gradcheck(layer, h, ga, rng):
    coef = rng.standard_normal(layer.forward(h, ga).shape)
    params = layer.params()
    theta = flatten(params + [h])
    n_p = sum(p.size for p in params)

    def f(t):
        unflatten_into(t[:n_p], params)
        return float(np.sum(coef * layer.forward(t[n_p:].reshape(h.shape), ga)))

    def g(t):
        unflatten_into(t[:n_p], params)
        layer.forward(t[n_p:].reshape(h.shape), ga)
        grads, gh = layer.backward(coef)
        return flatten(list(grads) + [gh])

    return grad_check(f, g, theta)


@pytest.mark.parametrize("kind", ["graphconv", "graphconv-relu", "sage", "sage-norm", "resgated"])
def test_layer_gradients(kind):
    rng = np.random.default_rng(hash(kind) % 2**32)
    for _ in range(10):
        ga = _random_graph(rng)
        d_in, d_out = rng.integers(1, 5, size=2)
        if kind.startswith("graphconv"):
            layer = GraphConvLayer.init(d_in, d_out, rng, "relu" if kind.endswith("relu") else "identity")
        elif kind.startswith("sage"):
            layer = SageLayer.init(d_in, d_out, rng, "identity", normalize=kind.endswith("norm"))
        else:
            d_out = d_in
            layer = ResGatedLayer([rng.standard_normal((d_in, d_in)) for _ in range(4)],
                                  [rng.standard_normal(d_in) for _ in range(4)])
        h = rng.standard_normal((ga.n, d_in))
        assert _layer_gradcheck(layer, h, ga, rng) < 1e-4


def test_contrastive_zero_embeddings():
    ga = GraphArrays.from_edges(4, [(0, 1), (2, 3)])
    z = np.zeros((4, 3))
    loss = contrastive_loss(z, ga, np.random.default_rng(0), q=1)
    assert loss == pytest.approx(2 * math.log(2), abs=1e-12)


def test_contrastive_limit_goes_to_zero():
    z = np.array([[30.0, 0.0], [30.0, 0.0], [-30.0, 0.0]])
    loss, _ = contrastive_loss_and_grad(z, [(0, 1)], [[2]])
    assert loss < 1e-100 or loss == pytest.approx(0.0, abs=1e-300)


def test_contrastive_no_edges():
    ga = GraphArrays.from_edges(3, np.zeros((0, 2)))
    with pytest.raises(NoPositivePairs):
        contrastive_loss(np.zeros((3, 2)), ga, np.random.default_rng(0))


def test_negatives_are_non_neighbors():
    rng = np.random.default_rng(0)
    _, pairs = sbm(40, 0.3, 0.05, seed=2)
    ga = GraphArrays.from_edges(40, pairs)
    anchors = np.arange(40)
    neg = sample_negatives(ga, anchors, 5, rng)
    adj = {(int(a), int(b)) for a, b in pairs} | {(int(b), int(a)) for a, b in pairs}
    for a, row in zip(anchors, neg):
        for n in row:
            assert n >= 0 and n != a and (int(a), int(n)) not in adj
    star = GraphArrays.from_edges(3, [(0, 1), (0, 2)])
    assert (sample_negatives(star, [0], 2, rng) == -1).all()


def test_contrastive_gradient():
    rng = np.random.default_rng(8)
    z = rng.standard_normal((6, 4))
    pairs = np.array([(0, 1), (1, 2), (3, 4), (0, 5)])
    neg = np.array([[3, 4], [5, -1], [0, 1], [2, 3]])
    f = lambda t: contrastive_loss_and_grad(t.reshape(6, 4), pairs, neg)[0]  # noqa: E731
    g = lambda t: contrastive_loss_and_grad(t.reshape(6, 4), pairs, neg)[1].ravel()  # noqa: E731
    assert grad_check(f, g, z.ravel()) < 1e-6


def _sbm_inputs():
    _, pairs = sbm(50, 0.2, 0.02, seed=0)
    ga = GraphArrays.from_edges(50, pairs)
    x = np.column_stack([np.ones(50), ga.degree().astype(float)])
    return x, ga


@pytest.mark.parametrize("encoder", ["graphconv", "sage", "resgated"])
def test_training_is_deterministic_and_zero_epochs_is_init(encoder):
    x, ga = _sbm_inputs()
    cfg = GnnConfig(encoder=encoder, epochs=2, seed=3)
    a = train_gnn_arrays(x, ga, cfg)
    b = train_gnn_arrays(x, ga, cfg)
    for p, q in zip(a.params(), b.params()):
        np.testing.assert_array_equal(p, q)
    init = GnnModel.init(GnnConfig(encoder=encoder, epochs=0, seed=3), 2)
    zero = train_gnn_arrays(x, ga, GnnConfig(encoder=encoder, epochs=0, seed=3))
    for p, q in zip(init.params(), zero.params()):
        np.testing.assert_array_equal(p, q)


@pytest.mark.parametrize("encoder", ["graphconv", "sage", "resgated"])
def test_loss_falls_over_first_ten_epochs(encoder):
    x, ga = _sbm_inputs()
    history = []
    train_gnn_arrays(x, ga, GnnConfig(encoder=encoder, epochs=10, seed=0), history)
    assert np.mean(history[5:]) < np.mean(history[:5])


@pytest.mark.parametrize("encoder", ["graphconv", "sage", "resgated"])
def test_model_shapes(encoder):
    cfg = GnnConfig(encoder=encoder)
    model = GnnModel.init(cfg, 4)
    x, ga = np.random.default_rng(0).standard_normal((5, 4)), _random_graph(np.random.default_rng(1))
    assert model.forward(x, ga).shape == (5, 64)
    mp = [b for b in model.blocks if hasattr(b, "ws") or hasattr(b, "w1") or hasattr(b, "w_self")]
    assert len(mp) == cfg.layers


@pytest.mark.parametrize("encoder", ["graphconv", "sage", "resgated"])
def test_permutation_equivariance(encoder):
    rng = np.random.default_rng(4)
    ga = _random_graph(rng, 7)
    x = rng.standard_normal((7, 3))
    model = GnnModel.init(GnnConfig(encoder=encoder, hidden=8, out_dim=4), 3)
    z = model.forward(x, ga)
    perm = rng.permutation(7)
    inv = np.argsort(perm)
    ga_p = GraphArrays(7, inv[ga.src], inv[ga.dst], ga.weight)
    z_p = model.forward(x[perm], ga_p)
    np.testing.assert_allclose(z_p, z[perm], rtol=1e-10, atol=1e-12)


def test_full_model_gradient():
    rng = np.random.default_rng(6)
    for encoder in ("graphconv", "sage", "resgated"):
        ga = _random_graph(rng, 5)
        model = GnnModel.init(GnnConfig(encoder=encoder, layers=2, hidden=3, out_dim=2, seed=1), 2)
        x = rng.standard_normal((5, 2))
        coef = rng.standard_normal((5, 2))
        params = model.params()
        for p in params:
            if p.ndim == 1:
                # non-zero biases keep pre-activations off the relu kink at exactly 0
                p[...] = rng.normal(scale=0.3, size=p.shape)

        def f(t):
            unflatten_into(t, params)
            return float(np.sum(coef * model.forward(x, ga)))

        def g(t):
            unflatten_into(t, params)
            model.forward(x, ga)
            return flatten(model.backward(coef))

        assert grad_check(f, g, flatten(params)) < 1e-4


def test_embed_outlets_and_checkpoint(tmp_path):
    g, _ = sbm_graph(20, 0.3, 0.05, seed=1)
    model = train_gnn(g, GnnConfig(epochs=1))
    table, missing = embed_outlets(model, g, ["node000.test", "absent.com"], ViewId.LLM)
    assert missing == ["absent.com"]
    assert table.dim == 64 and not table["absent.com"].any()
    again, _ = embed_outlets(model, g, ["node000.test", "absent.com"], ViewId.LLM)
    np.testing.assert_array_equal(table["node000.test"], again["node000.test"])
    path = tmp_path / "gnn.json"
    model.save(path)
    loaded = GnnModel.load(path)
    reloaded, _ = embed_outlets(loaded, g, ["node000.test"], ViewId.LLM)
    np.testing.assert_array_equal(reloaded["node000.test"], table["node000.test"])


def test_train_rejects_edgeless_graph():
    g = MediaGraph(kind="llm")
    g.add_node("a.com")
    with pytest.raises(NoPositivePairs):
        train_gnn(g, GnnConfig(epochs=1))
