"""Synthetic data: SBM graphs, the informative-view task, fixture worlds."""

from __future__ import annotations

import json
import os

import numpy as np

from .core import BIAS3, FACT3, VIEWS
from .numkit import make_rng


def sbm(n=50, p_in=0.2, p_out=0.02, seed=0, blocks=2):
    """Stochastic block model; returns (block labels, edge pairs i < j)."""
    rng = make_rng(seed, "sbm")
    y = np.repeat(np.arange(blocks), int(np.ceil(n / blocks)))[:n]
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            p = p_in if y[i] == y[j] else p_out
            if rng.random() < p:
                pairs.append((i, j))
    return y, np.array(pairs, dtype=np.int64).reshape(-1, 2)


def sbm_graph(n=50, p_in=0.2, p_out=0.02, seed=0):
    from .graph import MediaGraph

    y, pairs = sbm(n, p_in, p_out, seed)
    g = MediaGraph(kind="llm")
    names = [f"node{i:03d}.test" for i in range(n)]
    for name in names:
        g.add_node(name, 0)
    for i, j in pairs:
        g.add_edge(names[i], names[j])
    return g, dict(zip(names, y.tolist()))


def informative_view_task(n_train=300, n_test=100, d=16, n_classes=3, sigma=0.5, mean_scale=1.0, seed=0):
    """View 0 = class mean + N(0, sigma^2) noise; views 1..4 are N(0, 1) noise.

    Class means are ``mean_scale`` times distinct basis vectors.
    Returns (train_views, train_y, test_views, test_y) with views shaped
    (n, 5, d).
    """
    rng = make_rng(seed, "informative-view")
    means = np.zeros((n_classes, d))
    for c in range(n_classes):
        means[c, c % d] = mean_scale

    def draw(n):
        y = rng.integers(0, n_classes, size=n)
        views = rng.standard_normal((n, len(VIEWS), d))
        views[:, 0, :] = means[y] + sigma * rng.standard_normal((n, d))
        return views, y

    xtr, ytr = draw(n_train)
    xte, yte = draw(n_test)
    return xtr, ytr, xte, yte


# ---------------------------------------------------------------------------
# bundled fixture world

def _write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in rows:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


def make_fixture_world(out_dir, n_outlets=60, n_extra=40, seed=7):
    """Write a small deterministic world exercising every CLI stage.

    Outlets link preferentially inside their bias class, so graph
    embeddings carry label signal; text embeddings carry a weaker signal
    and the Wikipedia view is missing for a third of outlets.
    """
    os.makedirs(out_dir, exist_ok=True)
    rng = make_rng(seed, "fixture-world")
    outlets = [f"outlet{i:03d}.com" for i in range(n_outlets)]
    extras = [f"site{i:03d}.net" for i in range(n_extra)]
    bias = rng.integers(0, len(BIAS3), size=n_outlets)
    fact = np.clip(bias + rng.integers(-1, 2, size=n_outlets), 0, len(FACT3) - 1)
    extra_cls = rng.integers(0, len(BIAS3), size=n_extra)
    cls_of = dict(zip(outlets, bias.tolist())) | dict(zip(extras, extra_cls.tolist()))
    everyone = outlets + extras

    def similar(domain, k):
        c = cls_of[domain]
        same = [d for d in everyone if d != domain and cls_of[d] == c]
        other = [d for d in everyone if d != domain and cls_of[d] != c]
        picks = []
        for _ in range(k):
            pool = same if rng.random() < 0.8 else other
            cand = pool[int(rng.integers(0, len(pool)))]
            if cand not in picks:
                picks.append(cand)
        return picks

    labels = [
        {"domain": d, "bias": BIAS3.classes[b], "factuality": FACT3.classes[f]}
        for d, b, f in zip(outlets, bias.tolist(), fact.tolist())
    ]
    _write_jsonl(os.path.join(out_dir, "labels.jsonl"), labels)
    with open(os.path.join(out_dir, "seeds.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(f"https://www.{d}/\n" for d in outlets))

    alexa = []
    for d in everyone:
        alexa.append({
            "domain": d,
            "neighbors": similar(d, int(rng.integers(4, 6))),
            "features": {
                "site_rank": float(rng.integers(1, 100000)),
                "total_linked_sites": float(rng.integers(10, 5000)),
                "bounce_rate": round(float(rng.uniform(0.2, 0.8)), 4),
                "daily_time": round(float(rng.uniform(30, 600)), 2),
            },
        })
    _write_jsonl(os.path.join(out_dir, "alexa_source.jsonl"), alexa)
    hyper = [{"domain": d, "neighbors": similar(d, int(rng.integers(1, 5)))} for d in everyone]
    _write_jsonl(os.path.join(out_dir, "hyperlink_source.jsonl"), hyper)
    llm = []
    for d in everyone:
        sites = similar(d, 5)
        llm.append({"domain": d, "response": "\n".join(f"<s>https://www.{s}/</s>" for s in sites)})
    _write_jsonl(os.path.join(out_dir, "llm_responses.jsonl"), llm)

    centers = rng.standard_normal((len(BIAS3), 32))
    art = []
    for d, b in zip(outlets, bias.tolist()):
        v = 0.6 * centers[b] + rng.standard_normal(32)
        art.append({"domain": d, "view": "articles", "vector": [round(float(x), 6) for x in v]})
    _write_jsonl(os.path.join(out_dir, "articles_emb.jsonl"), art)
    wcenters = rng.standard_normal((len(BIAS3), 24))
    wiki = []
    for i, (d, b) in enumerate(zip(outlets, bias.tolist())):
        if i % 3 == 2:
            continue
        v = 0.5 * wcenters[b] + rng.standard_normal(24)
        wiki.append({"domain": d, "view": "wikipedia", "vector": [round(float(x), 6) for x in v]})
    _write_jsonl(os.path.join(out_dir, "wikipedia_emb.jsonl"), wiki)

    articles = []
    for d, b in zip(outlets, bias.tolist()):
        for k in range(5):
            logits = rng.standard_normal(len(BIAS3))
            logits[b] += 1.0
            p = np.exp(logits - logits.max())
            p /= p.sum()
            articles.append({
                "id": f"{d}/a{k}",
                "outlet": d,
                "task": "bias",
                "proba": [round(float(x), 6) for x in p[:-1]] + [round(1.0 - float(np.round(p[:-1], 6).sum()), 6)],
            })
    _write_jsonl(os.path.join(out_dir, "article_preds.jsonl"), articles)
    return out_dir
