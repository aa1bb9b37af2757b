import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mediafuse.errors import EmptyResponse, InvalidConfig, ParseError
from mediafuse.graph import (
    MediaGraph,
    NeighborSource,
    NodeFeatures,
    expand_levels,
    filter_article_links,
    format_edge_list,
    format_node_table,
    graph_stats,
    iter_expansion,
    level_stats,
    load_edge_list,
    load_node_table,
    node_feature_matrix,
    parse_edge_list,
    parse_llm_response,
    save_edge_list,
)

BBC_RESPONSE = """<s>https://www.cnn.com/</s>
<s>https://www.theguardian.com/</s>
<s>https://www.aljazeera.com/</s>
<s>https://www.nytimes.com/</s>
<s>https://www.reuters.com/</s>"""


def test_parse_bbc_response():
    assert parse_llm_response(BBC_RESPONSE) == ["cnn.com", "theguardian.com", "aljazeera.com", "nytimes.com", "reuters.com"]


def test_parse_response_dedups_and_truncates():
    assert parse_llm_response("<s>https://x.com/</s><s>https://x.com/</s>") == ["x.com"]
    many = "".join(f"<s>s{i}.com</s>" for i in range(8))
    assert parse_llm_response(many) == [f"s{i}.com" for i in range(5)]
    with pytest.raises(EmptyResponse):
        parse_llm_response("no tags here")


def test_filter_article_links():
    long_cnn = "https://www.cnn.com/2024/01/01/politics/" + "a" * 40
    assert len(long_cnn) > 65
    short_cnn = "https://www.cnn.com/2024/01/01/politics/x"
    assert len(short_cnn) < 65
    nyt = "https://www.nytimes.com/2024/01/01/us/politics/" + "b" * 40
    assert filter_article_links([long_cnn, short_cnn, nyt, long_cnn], "cnn.com") == [long_cnn]
    assert filter_article_links([], "cnn.com") == []


def test_expansion_hand_example():
    src = NeighborSource({"a": ["b", "c"], "b": ["c", "d"], "c": [], "d": ["a"]})
    g = expand_levels(["a"], src, 2, "llm")
    assert {d: r.level for d, r in g.nodes.items()} == {"a": 0, "b": 1, "c": 1, "d": 2}
    assert g.edges == {("a", "b"): 1, ("a", "c"): 1, ("b", "c"): 1, ("b", "d"): 1}


def test_msnbc_merge():
    src = NeighborSource({"cnn.com": ["msnbc.com"], "foxnews.com": ["msnbc.com"]})
    g = expand_levels(["cnn.com", "foxnews.com"], src, 1, "alexa")
    assert [d for d in g.nodes if d == "msnbc.com"] == ["msnbc.com"]
    assert g.degree("msnbc.com") == 2
    assert g.nodes["msnbc.com"].level == 1


def test_empty_source_and_bad_levels():
    g = expand_levels(["a.com"], NeighborSource({}), 3)
    assert list(g.nodes) == ["a.com"] and not g.edges
    with pytest.raises(InvalidConfig):
        expand_levels(["a.com"], NeighborSource({}), -1)


def test_hyperlink_weight_two_per_link():
    src = NeighborSource({"a.com": ["b.com"], "b.com": ["a.com"]})
    g = expand_levels(["a.com"], src, 2, "hyperlink")
    assert g.edges == {("a.com", "b.com"): 4}
    g = expand_levels(["a.com"], src, 1, "hyperlink")
    assert g.edges == {("a.com", "b.com"): 2}


def test_no_self_loops():
    g = expand_levels(["a.com"], NeighborSource({"a.com": ["a.com", "b.com"]}), 1)
    assert g.edges == {("a.com", "b.com"): 1}


@pytest.mark.parametrize(
    "edges, nodes, expected",
    [
        ([("a", "b"), ("c", "d")], [], (4, 2, 2, 2.0)),
        ([("a", "b"), ("b", "c")], ["d"], (4, 2, 2, 2.0)),
        ([], [], (0, 0, 0, 0.0)),
    ],
)
def test_graph_stats(edges, nodes, expected):
    g = MediaGraph()
    for n in nodes:
        g.add_node(n)
    for a, b in edges:
        g.add_edge(a, b)
    s = graph_stats(g)
    assert (s.nodes, s.edges, s.components, s.avg_nodes_per_component) == expected


def _random_source(rng, n):
    names = [f"n{i:03d}.org" for i in range(n)]
    table = {}
    for d in names:
        k = int(rng.integers(0, 6))
        table[d] = [names[j] for j in rng.integers(0, n, size=k)]
    return names, NeighborSource(table)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 40), st.integers(1, 5))
def test_levels_are_supersets(seed, n, levels):
    rng = np.random.default_rng(seed)
    names, src = _random_source(rng, n)
    seeds = list(rng.choice(names, size=int(rng.integers(1, min(n, 5) + 1)), replace=False))
    prev_nodes, prev_edges = set(), {}
    for g in iter_expansion(seeds, src, levels, "alexa"):
        assert prev_nodes <= set(g.nodes)
        assert all(g.edges.get(k, 0) >= w for k, w in prev_edges.items())
        prev_nodes, prev_edges = set(g.nodes), dict(g.edges)
    assert len(set(g.nodes)) == len(g.nodes)


def test_expansion_deterministic():
    rng = np.random.default_rng(1)
    names, src = _random_source(rng, 30)
    a = format_edge_list(expand_levels(names[:4], src, 3))
    b = format_edge_list(expand_levels(list(reversed(names[:4])), src, 3))
    assert a == b


def test_level_stats_rows():
    src = NeighborSource({"a": ["b"], "b": ["c"]})
    rows = level_stats(["a"], src, 2)
    assert [(r["level"], r["nodes"], r["edges"]) for r in rows] == [(0, 1, 0), (1, 2, 1), (2, 3, 2)]


def test_edge_list_parsing():
    g = parse_edge_list(["a.com\tb.com\t2"])
    assert g.edges == {("a.com", "b.com"): 2}
    g = parse_edge_list(["b.com\ta.com\t1"])
    assert list(g.edges) == [("a.com", "b.com")]
    g = parse_edge_list(["src\tdst\tweight", "a.com\tb.com\t1", "b.com\ta.com\t2"])
    assert g.edges == {("a.com", "b.com"): 3}


@pytest.mark.parametrize("bad", ["a.com\tb.com", "a.com\tb.com\tx", "a.com\ta.com\t1", "a.com\tb.com\t0"])
def test_edge_list_errors_carry_line(bad):
    with pytest.raises(ParseError) as exc:
        parse_edge_list(["# comment", "c.com\td.com\t1", bad], path="f.tsv")
    assert exc.value.line == 3
    assert "f.tsv:3" in str(exc.value)


def test_edge_list_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    names, src = _random_source(rng, 25)
    g = expand_levels(names[:3], src, 3, "hyperlink")
    p = tmp_path / "g.tsv"
    save_edge_list(g, p)
    text = p.read_text()
    save_edge_list(load_edge_list(p, "hyperlink"), tmp_path / "h.tsv")
    assert (tmp_path / "h.tsv").read_text() == text


def test_node_table_round_trip(tmp_path):
    src = NeighborSource(
        {"a.com": ["b.com"]},
        {"a.com": NodeFeatures(10.0, 20.0, 0.5, 100.0)},
    )
    g = expand_levels(["a.com", "z.com"], src, 1)
    p = tmp_path / "n.tsv"
    p.write_text(format_node_table(g, comment="x"))
    h = load_node_table(p, load_edge_list_str(format_edge_list(g)))
    assert {d: r.level for d, r in h.nodes.items()} == {"a.com": 0, "b.com": 1, "z.com": 0}
    assert h.nodes["a.com"].features == NodeFeatures(10.0, 20.0, 0.5, 100.0)
    assert h.nodes["b.com"].features is None


def load_edge_list_str(text):
    return parse_edge_list(text.splitlines())


def test_node_features():
    g = MediaGraph(kind="llm")
    g.add_edge("a", "b")
    g.add_edge("a", "c")
    x = node_feature_matrix(g)
    assert x.tolist() == [[1.0, 2.0], [1.0, 1.0], [1.0, 1.0]]
    g = MediaGraph(kind="alexa")
    g.add_node("a", 0, NodeFeatures(1, 2, 3, 4))
    g.add_node("b", 0, NodeFeatures(3, 2, 1, 0))
    x = node_feature_matrix(g)
    np.testing.assert_allclose(x.mean(axis=0), 0.0)
    r1 = node_feature_matrix(g, ["a", "b"], mode="random", seed=3)
    r2 = node_feature_matrix(g, ["b", "a"], mode="random", seed=3)
    np.testing.assert_array_equal(r1, r2[::-1])
