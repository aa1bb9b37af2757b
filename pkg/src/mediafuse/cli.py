"""``mediafuse`` command line.

Every command prints its resolved configuration (with the derived seed and
a config hash) as one JSON line on stdout, then writes its artifacts.
Values come from defaults, then ``--config FILE`` (JSON), then flags.

Exit codes: 0 ok, 1 runtime/numeric error, 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .bandit import BanditEnv, PpoConfig, RewardModel, fuse_with_policy, policy_config_dict, train_ppo
from .core import VIEWS, ViewId, get_scale, normalize_domain, stratified_split
from .ensemble import outlet_aggregate
from .errors import InputError, MediaFuseError
from .evaluation import compute_metrics, majority_baseline, middle_baseline, render_table
from .fusion import STRATEGIES, FusionConfig, StaticFusion, ViewProjector, gather_views
from .gnn import GnnConfig, GnnModel, embed_outlets, train_gnn
from .graph import (
    KINDS,
    format_node_table,
    level_stats,
    load_edge_list,
    load_llm_responses,
    load_neighbor_source,
    load_node_table,
    save_edge_list,
    expand_levels,
)
from .io import (
    ensure_dir,
    file_digest,
    load_article_predictions,
    load_embeddings,
    load_labels,
    load_predictions,
    load_splits,
    prediction_rows,
    read_json,
    save_embeddings,
    save_splits,
    write_json,
    write_jsonl,
)
from .numkit import derive_seed
from .numkit import checkpoint as ckpt
from .synth import make_fixture_world

log = logging.getLogger("mediafuse")

INPUT_KEYS = {"seeds", "source", "labels", "splits", "embeddings", "edges", "nodes", "checkpoint", "predictions", "fixtures"}
OUTPUT_KEYS = {"out", "stats_out", "nodes_out"}
IGNORED_KEYS = {"command", "func", "config"}


def _setup_logging():
    level = os.environ.get("MEDIAFUSE_LOG", "error").lower()
    logging.basicConfig(
        level={"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _input_paths(args):
    for key in sorted(INPUT_KEYS):
        val = getattr(args, key, None)
        if val is None:
            continue
        for p in val if isinstance(val, list) else [val]:
            yield key, p


def resolved_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in IGNORED_KEYS}


def config_hash(args) -> str:
    """Hash of non-path settings plus the content of every input file.

    Output locations and input path spellings do not enter the hash, so
    the same run written to two directories stamps identical hashes.
    """
    payload = {}
    for k, v in resolved_config(args).items():
        if k in OUTPUT_KEYS or k in INPUT_KEYS:
            continue
        payload[k] = v
    for key, p in _input_paths(args):
        if os.path.isdir(p):
            digests = {}
            for name in sorted(os.listdir(p)):
                full = os.path.join(p, name)
                if os.path.isfile(full):
                    digests[name] = file_digest(full)
            payload.setdefault(key, []).append(digests)
        else:
            payload.setdefault(key, []).append(file_digest(p))
    payload["command"] = args.command
    blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _announce(args, seed):
    h = config_hash(args)
    print(json.dumps({"command": args.command, "config": resolved_config(args), "seed": seed, "config_hash": h},
                     sort_keys=True, default=str))
    sys.stdout.flush()
    return h


def _warn_missing(kind, missing, sidecar, h):
    if missing:
        print(f"warning: {len(missing)} outlet(s) missing from {kind}: {', '.join(missing[:10])}"
              + (" ..." if len(missing) > 10 else ""), file=sys.stderr)
    write_json(sidecar, {"config_hash": h, "missing": list(missing), "source": kind})


def _read_seed_domains(path):
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("{"):
                line = json.loads(line)["domain"]
            out.append(normalize_domain(line))
    return out


def _load_graph(edges, nodes, kind):
    g = load_edge_list(edges, kind=kind)
    if nodes:
        load_node_table(nodes, g)
    return g


def _tables(paths):
    tables = {}
    for p in paths or []:
        t = load_embeddings(p)
        if t.view in tables:
            raise InputError(f"view {t.view.label} supplied twice")
        tables[t.view] = t
    return tables


def _labeled(labels_path, task, scale):
    kw = {"bias_scale": scale} if task == "bias" else {"fact_scale": scale}
    outlets = load_labels(labels_path, **kw)
    return {o.domain: o.label(task) for o in outlets if o.label(task) is not None}


# ---------------------------------------------------------------------------
# commands

def cmd_make_fixtures(args):
    h = _announce(args, args.seed)
    make_fixture_world(args.out, seed=args.seed)
    write_json(os.path.join(args.out, "MANIFEST.json"), {"config_hash": h, "seed": args.seed})
    return 0


def cmd_build_graph(args):
    h = _announce(args, args.seed)
    seeds = _read_seed_domains(args.seeds)
    if not seeds:
        raise InputError(f"{args.seeds}: no seed domains")
    source = load_llm_responses(args.source) if args.kind == "llm" else load_neighbor_source(args.source)
    g = expand_levels(seeds, source, args.levels, args.kind)
    save_edge_list(g, args.out, comment=f"config_hash={h}")
    nodes_out = args.nodes_out or args.out + ".nodes.tsv"
    with open(nodes_out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_node_table(g, comment=f"config_hash={h}"))
    stats_out = args.stats_out or args.out + ".stats.json"
    write_json(stats_out, {"config_hash": h, "kind": args.kind, "levels": level_stats(seeds, source, args.levels, args.kind)})
    return 0


def cmd_split(args):
    seed = derive_seed(args.seed, "split")
    h = _announce(args, seed)
    scale = get_scale(args.scale)
    kw = {"bias_scale": scale} if args.task == "bias" else {"fact_scale": scale}
    outlets = [o for o in load_labels(args.labels, **kw) if o.label(args.task) is not None]
    split = stratified_split(outlets, tuple(args.ratios), seed=seed, task=args.task)
    save_splits(args.out, split, {"config_hash": h})
    return 0


def _gnn_config(args, seed):
    return GnnConfig(
        encoder=args.encoder,
        epochs=args.epochs,
        layers=args.layers,
        hidden=args.hidden,
        batch=args.batch,
        learning_rate=args.lr,
        dropout=args.dropout,
        out_dim=args.out_dim,
        negatives_per_positive=args.negatives,
        features=args.features,
        seed=seed,
    )


def cmd_train_gnn(args):
    seed = derive_seed(args.seed, "gnn", args.kind)
    h = _announce(args, seed)
    g = _load_graph(args.edges, args.nodes, args.kind)
    history = []
    model = train_gnn(g, _gnn_config(args, seed), history)
    header, named = model.to_checkpoint()
    header.update(config_hash=h, kind=args.kind, loss_history=history)
    ckpt.save(args.out, header, named)
    return 0


def cmd_embed(args):
    h = _announce(args, args.seed)
    model = GnnModel.load(args.checkpoint)
    header, _ = ckpt.load(args.checkpoint)
    kind = args.kind or header.get("kind", "alexa")
    g = _load_graph(args.edges, args.nodes, kind)
    outlets = sorted(o.domain for o in load_labels(args.labels))
    view = ViewId.parse(args.view or kind)
    table, missing = embed_outlets(model, g, outlets, view)
    save_embeddings(args.out, table, {"config_hash": h})
    _warn_missing(f"{kind} graph", missing, args.out + ".missing.json", h)
    return 0


def _fusion_config(args, seed, strategy):
    return FusionConfig(
        strategy=strategy,
        views=tuple(args.views),
        d=args.d,
        query_views=tuple(args.query_views),
        context_views=tuple(args.context_views),
        epochs=args.fusion_epochs,
        seed=seed,
    )


def _coverage(tables, domains, h, out_dir, views=VIEWS):
    report = {}
    for v in views:
        t = tables.get(v)
        missing = [d for d in domains if t is None or d not in t]
        if missing:
            print(f"warning: view {v.label} missing for {len(missing)} outlet(s)", file=sys.stderr)
        report[v.label] = missing
    write_json(os.path.join(out_dir, "missing.json"), {"config_hash": h, "missing": report})


def cmd_fuse(args):
    seed = derive_seed(args.seed, "fuse", args.strategy)
    h = _announce(args, seed)
    ensure_dir(args.out)
    scale = get_scale(args.scale)
    labels = _labeled(args.labels, args.task, scale)
    split = load_splits(args.splits)
    tables = _tables(args.embeddings)
    train = [d for d in split.train if d in labels]
    cfg = _fusion_config(args, seed, args.strategy)
    fusion = StaticFusion.fit(tables, train, [labels[d] for d in train], scale, cfg)
    fusion.save(os.path.join(args.out, "model.json"), {"config_hash": h})
    rows = []
    for name in ("dev", "test"):
        part = [d for d in split.part(name) if d in labels]
        if part:
            proba = fusion.predict_proba(tables, part)
            rows.extend(prediction_rows(part, proba, args.task, scale, {"split": name, "config_hash": h}))
    write_jsonl(os.path.join(args.out, "predictions.jsonl"), rows)
    _coverage(tables, sorted(labels), h, args.out, [ViewId.parse(v) for v in cfg.views])
    return 0


def cmd_train_rl(args):
    seed = derive_seed(args.seed, "rl")
    h = _announce(args, seed)
    ensure_dir(args.out)
    scale = get_scale(args.scale)
    labels = _labeled(args.labels, args.task, scale)
    split = load_splits(args.splits)
    tables = _tables(args.embeddings)
    projector = ViewProjector({v: t.dim for v, t in tables.items()}, args.d, seed=seed)

    def states(domains):
        raw, present = gather_views(tables, domains)
        return projector.forward(raw, present)

    train = [d for d in split.train if d in labels]
    projector.fit_scaling(*gather_views(tables, train))
    xtr = states(train)
    ytr = np.array([labels[d] for d in train])
    reward = RewardModel.pretrain(xtr, ytr, scale, seed=seed)
    cfg = PpoConfig(updates=args.updates, seed=seed, learning_rate=args.lr, rollout=args.rollout, minibatch=args.minibatch)
    policy, history = train_ppo(BanditEnv(xtr, ytr, reward), cfg)
    policy.save(os.path.join(args.out, "policy.json"), {"config_hash": h, "ppo": policy_config_dict(cfg)})
    header, named = reward.clf.to_checkpoint({"config_hash": h, "trained_on": "uniform-fusion"})
    ckpt.save(os.path.join(args.out, "reward_model.json"), header, named)
    write_jsonl(os.path.join(args.out, "train_log.jsonl"), ({**row, "config_hash": h} for row in history))

    rows, wrows = [], []
    for name in ("dev", "test"):
        part = [d for d in split.part(name) if d in labels]
        if not part:
            continue
        w, fused, _ = fuse_with_policy(policy, reward, states(part))
        proba = reward.proba(fused)
        rows.extend(prediction_rows(part, proba, args.task, scale, {"split": name, "config_hash": h}))
        for d, wi in zip(part, w):
            wrows.append({"domain": d, "split": name, "weights": [float(x) for x in wi], "config_hash": h})
    write_jsonl(os.path.join(args.out, "predictions.jsonl"), rows)
    write_jsonl(os.path.join(args.out, "weights.jsonl"), wrows)
    _coverage(tables, sorted(labels), h, args.out)
    return 0


def cmd_vote(args):
    h = _announce(args, args.seed)
    scale = get_scale(args.scale)
    rows = load_article_predictions(args.predictions, scale, task=args.task)
    outlets = sorted(_labeled(args.labels, args.task, scale)) if args.labels else None
    result, missing = outlet_aggregate(rows, scale, args.mode, outlets)
    domains = [d for d, _ in result.items]
    proba = np.array([p for _, p in result.items]) if result.items else np.zeros((0, len(scale)))
    write_jsonl(args.out, prediction_rows(domains, proba, args.task, scale, {"mode": args.mode, "config_hash": h}))
    if outlets is not None:
        _warn_missing("article predictions", missing, args.out + ".missing.json", h)
    return 0


def cmd_evaluate(args):
    h = _announce(args, args.seed)
    scale = get_scale(args.scale)
    labels = _labeled(args.labels, args.task, scale)
    split = load_splits(args.splits)
    part = [d for d in split.part(args.split) if d in labels]
    train_truths = [labels[d] for d in split.train if d in labels]
    truths = [labels[d] for d in part]
    runs = []
    report = {"config_hash": h, "task": args.task, "scale": scale.name, "split": args.split, "n": len(part), "runs": {}}
    for path in args.predictions:
        preds = load_predictions(path, scale, task=args.task)
        covered = [d for d in part if d in preds]
        missing = [d for d in part if d not in preds]
        if missing:
            print(f"warning: {path}: {len(missing)} {args.split} outlet(s) without predictions, scored as middle class",
                  file=sys.stderr)
        y_pred = [preds[d][0] if d in preds else scale.middle for d in part]
        m = compute_metrics(y_pred, truths, scale)
        name = _run_name(path)
        runs.append((name, m))
        report["runs"][name] = {**m.as_dict(), "covered": len(covered), "missing": missing}
    maj = majority_baseline(train_truths, truths, scale)
    mid = middle_baseline(truths, scale)
    runs += [("majority-class", maj), ("middle-class", mid)]
    report["runs"]["majority-class"] = maj.as_dict()
    report["runs"]["middle-class"] = mid.as_dict()
    table = render_table(runs)
    report["table"] = table.splitlines()
    print(table)
    write_json(args.out, report)
    return 0


def _run_name(path):
    base = os.path.basename(path)
    if base == "predictions.jsonl":
        return os.path.basename(os.path.dirname(os.path.abspath(path))) or base
    return os.path.splitext(base)[0]


def cmd_pipeline(args):
    """End-to-end run over a fixture directory, writing everything under --out."""
    h = _announce(args, args.seed)
    fx, out = args.fixtures, ensure_dir(args.out)
    sub = lambda *p: os.path.join(out, *p)  # noqa: E731
    common = ["--seed", str(args.seed)]
    steps = [["split", "--labels", f"{fx}/labels.jsonl", "--task", args.task, "--scale", args.scale, "--out", sub("splits.json")]]
    sources = {"alexa": "alexa_source.jsonl", "hyperlink": "hyperlink_source.jsonl", "llm": "llm_responses.jsonl"}
    ensure_dir(sub("graphs"))
    ensure_dir(sub("embeddings"))
    for kind, src in sources.items():
        edges = sub("graphs", f"{kind}.tsv")
        steps.append(["build-graph", "--seeds", f"{fx}/seeds.txt", "--source", f"{fx}/{src}", "--kind", kind,
                      "--levels", str(args.levels), "--out", edges])
        steps.append(["train-gnn", "--edges", edges, "--nodes", edges + ".nodes.tsv", "--kind", kind,
                      "--encoder", args.encoder, "--epochs", str(args.epochs), "--out", sub("graphs", f"{kind}.gnn.json")])
        steps.append(["embed", "--checkpoint", sub("graphs", f"{kind}.gnn.json"), "--edges", edges,
                      "--nodes", edges + ".nodes.tsv", "--labels", f"{fx}/labels.jsonl",
                      "--out", sub("embeddings", f"{kind}.jsonl")])
    embs = [sub("embeddings", f"{k}.jsonl") for k in sources] + [f"{fx}/articles_emb.jsonl", f"{fx}/wikipedia_emb.jsonl"]
    base = ["--labels", f"{fx}/labels.jsonl", "--splits", sub("splits.json"), "--task", args.task, "--scale", args.scale]
    preds = []
    for strategy in STRATEGIES:
        steps.append(["fuse", *base, "--strategy", strategy, "--embeddings", *embs, "--out", sub("fusion", strategy)])
        preds.append(sub("fusion", strategy, "predictions.jsonl"))
    steps.append(["train-rl", *base, "--embeddings", *embs, "--updates", str(args.updates), "--out", sub("fusion", "rl-ppo")])
    preds.append(sub("fusion", "rl-ppo", "predictions.jsonl"))
    for mode in ("hard", "soft"):
        steps.append(["vote", "--predictions", f"{fx}/article_preds.jsonl", "--mode", mode, "--task", args.task,
                      "--scale", args.scale, "--labels", f"{fx}/labels.jsonl", "--out", sub(f"articles_{mode}.jsonl")])
        preds.append(sub(f"articles_{mode}.jsonl"))
    steps.append(["evaluate", *base, "--predictions", *preds, "--out", sub("report.json")])
    for step in steps:
        log.info("pipeline step: %s", " ".join(step))
        code = main(step + common)
        if code:
            return code
    write_json(sub("MANIFEST.json"), {"config_hash": h, "steps": [s[0] for s in steps]})
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_common(p):
    p.add_argument("--config", help="JSON file of option defaults (flags override it)")
    p.add_argument("--seed", type=int, default=0, help="master seed; module seeds derive from it")


def build_parser():
    parser = argparse.ArgumentParser(prog="mediafuse", description="Multi-view news outlet profiling pipeline.")
    parser.add_argument("--version", action="version", version=f"mediafuse {__version__}")
    sp = parser.add_subparsers(dest="command", required=True)

    p = sp.add_parser("make-fixtures", help="write the synthetic fixture world")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_make_fixtures)

    p = sp.add_parser("build-graph", help="expand a media graph from seed outlets")
    p.add_argument("--seeds", required=True, help="one domain/URL per line (or labels JSONL)")
    p.add_argument("--source", required=True, help="neighbor JSONL, or LLM responses JSONL for --kind llm")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--out", required=True, help="canonical edge list (TSV)")
    p.add_argument("--stats-out", help="stats JSON (default: OUT.stats.json)")
    p.add_argument("--nodes-out", help="node table TSV (default: OUT.nodes.tsv)")
    _add_common(p)
    p.set_defaults(func=cmd_build_graph)

    p = sp.add_parser("split", help="stratified train/dev/test split")
    p.add_argument("--labels", required=True)
    p.add_argument("--task", choices=("bias", "factuality"), default="bias")
    p.add_argument("--scale", default="bias3")
    p.add_argument("--ratios", type=float, nargs=3, default=[0.8, 0.1, 0.1])
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_split)

    p = sp.add_parser("train-gnn", help="unsupervised contrastive GNN training")
    p.add_argument("--edges", required=True)
    p.add_argument("--nodes")
    p.add_argument("--kind", choices=KINDS, default="alexa")
    p.add_argument("--encoder", choices=("graphconv", "sage", "resgated"), default="graphconv")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--out-dim", type=int, default=64)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--features", choices=("default", "random"), default="default")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_train_gnn)

    p = sp.add_parser("embed", help="write outlet embeddings from a trained GNN")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--nodes")
    p.add_argument("--kind", choices=KINDS)
    p.add_argument("--labels", required=True, help="outlets to embed")
    p.add_argument("--view", choices=[v.label for v in VIEWS])
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_embed)

    def fusion_args(p):
        p.add_argument("--labels", required=True)
        p.add_argument("--splits", required=True)
        p.add_argument("--embeddings", nargs="+", required=True)
        p.add_argument("--task", choices=("bias", "factuality"), default="bias")
        p.add_argument("--scale", default="bias3")
        p.add_argument("--d", type=int, default=64)
        p.add_argument("--out", required=True)
        _add_common(p)

    p = sp.add_parser("fuse", help="train a static fusion model and predict dev/test outlets")
    fusion_args(p)
    p.add_argument("--strategy", choices=STRATEGIES, default="concat-linear")
    p.add_argument("--views", nargs="+", default=[v.label for v in VIEWS])
    p.add_argument("--query-views", nargs="+", default=["articles"])
    p.add_argument("--context-views", nargs="+", default=["alexa", "hyperlink", "llm"])
    p.add_argument("--fusion-epochs", type=int, default=60)
    p.set_defaults(func=cmd_fuse)

    p = sp.add_parser("train-rl", help="PPO view-weighting policy (contextual bandit)")
    fusion_args(p)
    p.add_argument("--updates", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--rollout", type=int, default=1024)
    p.add_argument("--minibatch", type=int, default=256)
    p.set_defaults(func=cmd_train_rl)

    p = sp.add_parser("vote", help="aggregate article predictions per outlet")
    p.add_argument("--predictions", required=True, help="article-level JSONL with an 'outlet' field")
    p.add_argument("--mode", choices=("hard", "soft"), default="soft")
    p.add_argument("--task", choices=("bias", "factuality"), default="bias")
    p.add_argument("--scale", default="bias3")
    p.add_argument("--labels", help="labels file, for reporting outlets without articles")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_vote)

    p = sp.add_parser("evaluate", help="score prediction files against labels")
    p.add_argument("--predictions", nargs="+", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--splits", required=True)
    p.add_argument("--split", choices=("train", "dev", "test"), default="test")
    p.add_argument("--task", choices=("bias", "factuality"), default="bias")
    p.add_argument("--scale", default="bias3")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sp.add_parser("pipeline", help="run every stage over a fixture directory")
    p.add_argument("--fixtures", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--task", choices=("bias", "factuality"), default="bias")
    p.add_argument("--scale", default="bias3")
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--encoder", choices=("graphconv", "sage", "resgated"), default="graphconv")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--updates", type=int, default=40)
    _add_common(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = read_json(args.config)
        if not isinstance(cfg, dict):
            raise InputError(f"{args.config}: config must be a JSON object")
        # re-parse with file values as defaults so explicit flags still win
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise InputError(f"{args.config}: unknown option(s) {sorted(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _check_inputs(args):
    for key, p in _input_paths(args):
        if not os.path.exists(p):
            raise InputError(f"--{key.replace('_', '-')}: {p} does not exist")


def _make_output_parents(args):
    for key in sorted(OUTPUT_KEYS):
        val = getattr(args, key, None)
        parent = os.path.dirname(val) if val else ""
        if parent:
            os.makedirs(parent, exist_ok=True)


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        _check_inputs(args)
        _make_output_parents(args)
        return args.func(args) or 0
    except (InputError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MediaFuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
