"""Media graph construction and component statistics.

Three graph kinds share one storage form: an undirected graph over
normalized domains with integer edge weights.  Node identity *is* the
normalized domain, so the same site surfacing from several query clusters
collapses into one node as the graph grows.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .core import normalize_domain
from .errors import EmptyResponse, InvalidConfig, InvalidDomain, ParseError
from .numkit import kernels

KINDS = ("alexa", "hyperlink", "llm")
MAX_NEIGHBORS = 5
MIN_ARTICLE_URL_LEN = 65
FEATURE_NAMES = ("site_rank", "total_linked_sites", "bounce_rate", "daily_time")

_TAG_RE = re.compile(r"<s>(.*?)</s>", re.DOTALL)


@dataclass(frozen=True)
class NodeFeatures:
    site_rank: float = 0.0
    total_linked_sites: float = 0.0
    bounce_rate: float = 0.0
    daily_time: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite(self.as_array())):
            raise InvalidConfig("node features must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=np.float64)


@dataclass
class NodeRecord:
    domain: str
    level: int
    features: NodeFeatures | None = None


@dataclass
class MediaGraph:
    kind: str = "alexa"
    nodes: dict[str, NodeRecord] = field(default_factory=dict)
    edges: dict[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfig(f"unknown graph kind {self.kind!r}")

    def add_node(self, domain, level=0, features=None) -> bool:
        """Insert ``domain`` if new; the first level assigned sticks."""
        rec = self.nodes.get(domain)
        if rec is None:
            self.nodes[domain] = NodeRecord(domain, level, features)
            return True
        if rec.features is None and features is not None:
            rec.features = features
        return False

    def add_edge(self, a, b, weight=1):
        if a == b:
            return
        if weight < 1:
            raise InvalidConfig("edge weights must be >= 1")
        for d in (a, b):
            if d not in self.nodes:
                self.add_node(d, 0)
        key = (a, b) if a < b else (b, a)
        self.edges[key] = self.edges.get(key, 0) + int(weight)

    def degree(self, domain) -> int:
        return sum(1 for a, b in self.edges if a == domain or b == domain)

    def degrees(self) -> dict[str, int]:
        deg = dict.fromkeys(self.nodes, 0)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def neighbors(self, domain) -> list[str]:
        out = []
        for a, b in self.edges:
            if a == domain:
                out.append(b)
            elif b == domain:
                out.append(a)
        return sorted(out)

    def node_order(self) -> list[str]:
        return sorted(self.nodes)

    def index_arrays(self, order: Sequence[str] | None = None):
        """Return (order, src, dst, weight) with both directions of each edge."""
        order = list(order) if order is not None else self.node_order()
        pos = {d: i for i, d in enumerate(order)}
        pairs = sorted(self.edges.items())
        src = np.empty(2 * len(pairs), dtype=np.int64)
        dst = np.empty(2 * len(pairs), dtype=np.int64)
        w = np.empty(2 * len(pairs), dtype=np.float64)
        for k, ((a, b), wt) in enumerate(pairs):
            src[2 * k], dst[2 * k] = pos[a], pos[b]
            src[2 * k + 1], dst[2 * k + 1] = pos[b], pos[a]
            w[2 * k] = w[2 * k + 1] = wt
        return order, src, dst, w


class NeighborSource:
    """Fixture-backed neighbor lookup; unknown domains have no neighbors."""

    def __init__(self, table: Mapping[str, Sequence[str]], features: Mapping[str, NodeFeatures] | None = None):
        clean = {}
        for domain, neigh in table.items():
            key = normalize_domain(domain)
            out = []
            for n in neigh:
                n = normalize_domain(n)
                if n not in out:
                    out.append(n)
            clean[key] = tuple(out[:MAX_NEIGHBORS])
        self._table = clean
        self.features = dict(features or {})

    def __call__(self, domain) -> list[str]:
        return list(self._table.get(domain, ()))

    lookup = __call__

    def __len__(self):
        return len(self._table)

    @classmethod
    def from_llm_responses(cls, responses: Mapping[str, str]):
        table = {}
        for domain, text in responses.items():
            try:
                table[domain] = parse_llm_response(text)
            except EmptyResponse:
                table[domain] = []
        return cls(table)


def parse_llm_response(text: str) -> list[str]:
    """Pull the ``<s>...</s>`` tagged sites out of a similarity reply."""
    out: list[str] = []
    found = False
    for raw in _TAG_RE.findall(text):
        try:
            d = normalize_domain(raw)
        except InvalidDomain:
            continue
        found = True
        if d not in out:
            out.append(d)
    if not found:
        raise EmptyResponse("no <s>...</s> tagged sites in response")
    return out[:MAX_NEIGHBORS]


def _url_host(url: str) -> str | None:
    try:
        return normalize_domain(url)
    except InvalidDomain:
        return None


def filter_article_links(links: Iterable[str], site_domain: str) -> list[str]:
    """Internal links longer than 65 characters, in first-seen order."""
    out = []
    seen = set()
    for url in links:
        if len(url) <= MIN_ARTICLE_URL_LEN or url in seen:
            continue
        if _url_host(url) == site_domain:
            seen.add(url)
            out.append(url)
    return out


def _edge_unit(kind):
    # a hyperlink A->B stands for the pair of directed edges A->B and B->A
    return 2 if kind == "hyperlink" else 1


def iter_expansion(seeds: Iterable[str], source, max_level: int, kind: str = "alexa") -> Iterator[MediaGraph]:
    """Yield the graph after level 0 and after every expansion round.

    The same graph object is mutated and re-yielded; consumers that keep
    snapshots must copy.
    """
    if max_level < 0:
        raise InvalidConfig("max_level must be >= 0")
    g = MediaGraph(kind=kind)
    feats = getattr(source, "features", {}) or {}
    for s in sorted(set(seeds)):
        g.add_node(s, 0, feats.get(s))
    yield g
    unit = _edge_unit(kind)
    frontier = sorted(g.nodes)
    for level in range(1, max_level + 1):
        introduced = []
        for querier in frontier:
            for neigh in source(querier):
                if neigh == querier:
                    continue
                if g.add_node(neigh, level, feats.get(neigh)):
                    introduced.append(neigh)
                g.add_edge(querier, neigh, unit)
        frontier = sorted(introduced)
        yield g


def expand_levels(seeds: Iterable[str], source, max_level: int, kind: str = "alexa") -> MediaGraph:
    g = None
    for g in iter_expansion(seeds, source, max_level, kind):
        pass
    return g


@dataclass(frozen=True)
class GraphStats:
    nodes: int
    edges: int
    components: int
    avg_nodes_per_component: float

    def as_dict(self):
        return {
            "nodes": self.nodes,
            "edges": self.edges,
            "components": self.components,
            "avg_nodes_per_component": self.avg_nodes_per_component,
        }


def component_labels(g: MediaGraph) -> dict[str, int]:
    order, src, dst, _ = g.index_arrays()
    roots = kernels.connected_components(len(order), src[::2], dst[::2])
    return dict(zip(order, roots.tolist()))


def graph_stats(g: MediaGraph) -> GraphStats:
    n = len(g.nodes)
    if n == 0:
        return GraphStats(0, 0, 0, 0.0)
    labels = component_labels(g)
    c = len(set(labels.values()))
    return GraphStats(n, len(g.edges), c, n / c)


def level_stats(seeds, source, max_level, kind="alexa") -> list[dict]:
    rows = []
    for level, g in enumerate(iter_expansion(seeds, source, max_level, kind)):
        rows.append({"level": level, **graph_stats(g).as_dict()})
    return rows


# ---------------------------------------------------------------------------
# edge lists

def parse_edge_list(lines: Iterable[str], kind="alexa", path=None) -> MediaGraph:
    g = MediaGraph(kind=kind)
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if not g.edges and parts[:2] == ["src", "dst"]:
            continue
        if len(parts) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(parts)}", line=lineno, path=path)
        a, b, w = parts
        try:
            weight = int(w)
        except ValueError:
            raise ParseError(f"weight {w!r} is not an integer", line=lineno, path=path) from None
        if weight < 1:
            raise ParseError(f"weight must be >= 1, got {weight}", line=lineno, path=path)
        try:
            a, b = normalize_domain(a), normalize_domain(b)
        except InvalidDomain as exc:
            raise ParseError(str(exc), line=lineno, path=path) from None
        if a == b:
            raise ParseError(f"self-loop on {a!r}", line=lineno, path=path)
        g.add_edge(a, b, weight)
    return g


def load_edge_list(path, kind="alexa") -> MediaGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh, kind=kind, path=str(path))


def format_edge_list(g: MediaGraph, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    for (a, b), w in sorted(g.edges.items()):
        lines.append(f"{a}\t{b}\t{w}")
    return "".join(line + "\n" for line in lines)


def save_edge_list(g: MediaGraph, path, comment: str | None = None):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edge_list(g, comment))


# nodes sidecar: domain, level, then the four features or "-" when absent

def format_node_table(g: MediaGraph, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("\t".join(("domain", "level") + FEATURE_NAMES))
    for d in g.node_order():
        rec = g.nodes[d]
        if rec.features is None:
            feats = ["-"] * len(FEATURE_NAMES)
        else:
            feats = [repr(float(v)) for v in rec.features.as_array()]
        lines.append("\t".join([d, str(rec.level)] + feats))
    return "".join(line + "\n" for line in lines)


def load_node_table(path, g: MediaGraph) -> MediaGraph:
    """Merge levels, features and isolated nodes from a node table into ``g``."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#") or line.startswith("domain\t"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 + len(FEATURE_NAMES):
                raise ParseError("malformed node row", line=lineno, path=str(path))
            try:
                level = int(parts[1])
                feats = None
                if parts[2] != "-":
                    feats = NodeFeatures(*(float(v) for v in parts[2:]))
            except (ValueError, InvalidConfig) as exc:
                raise ParseError(str(exc), line=lineno, path=str(path)) from None
            d = normalize_domain(parts[0])
            if d in g.nodes:
                g.nodes[d].level = level
                g.nodes[d].features = feats
            else:
                g.add_node(d, level, feats)
    return g


def load_neighbor_source(path) -> NeighborSource:
    table = {}
    feats = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                domain = normalize_domain(rec["domain"])
                neigh = [normalize_domain(n) for n in rec.get("neighbors", [])]
            except (json.JSONDecodeError, KeyError, TypeError, InvalidDomain) as exc:
                raise ParseError(f"bad neighbor record: {exc}", line=lineno, path=str(path)) from None
            table[domain] = neigh
            if rec.get("features") is not None:
                try:
                    feats[domain] = NodeFeatures(**{k: float(rec["features"][k]) for k in FEATURE_NAMES})
                except (KeyError, TypeError, ValueError, InvalidConfig) as exc:
                    raise ParseError(f"bad features: {exc}", line=lineno, path=str(path)) from None
    return NeighborSource(table, feats)


def load_llm_responses(path) -> NeighborSource:
    responses = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                responses[normalize_domain(rec["domain"])] = str(rec["response"])
            except (json.JSONDecodeError, KeyError, TypeError, InvalidDomain) as exc:
                raise ParseError(f"bad response record: {exc}", line=lineno, path=str(path)) from None
    return NeighborSource.from_llm_responses(responses)


# ---------------------------------------------------------------------------
# GNN-facing node features

def node_feature_matrix(g: MediaGraph, order: Sequence[str] | None = None, mode="default", seed=0, dim=16):
    """Input features for the encoders, one row per node in ``order``.

    ``default``: Alexa graphs get their four site features z-scored over the
    graph (missing rows fall back to zeros after scoring); other kinds get a
    constant 1 and the node degree.  ``random``: seeded Gaussian features
    keyed by domain, independent of node order.
    """
    from .numkit import make_rng

    order = list(order) if order is not None else g.node_order()
    if mode == "random":
        x = np.empty((len(order), dim))
        for i, d in enumerate(order):
            x[i] = make_rng(seed, "node-feature", d).standard_normal(dim)
        return x
    if mode != "default":
        raise InvalidConfig(f"unknown feature mode {mode!r}")
    has_feats = g.kind == "alexa" and any(g.nodes[d].features is not None for d in order)
    if has_feats:
        raw = np.zeros((len(order), len(FEATURE_NAMES)))
        mask = np.zeros(len(order), dtype=bool)
        for i, d in enumerate(order):
            f = g.nodes[d].features
            if f is not None:
                raw[i] = f.as_array()
                mask[i] = True
        mu = raw[mask].mean(axis=0)
        sd = raw[mask].std(axis=0)
        sd[sd == 0] = 1.0
        x = np.where(mask[:, None], (raw - mu) / sd, 0.0)
        return x
    deg = g.degrees()
    return np.column_stack([np.ones(len(order)), np.array([float(deg[d]) for d in order])])
