"""
Tests for diamond/Laakso generation, metrics and l1 embeddings
"""
import itertools
import json
from dataclasses import replace

import networkx as nx
import numpy as np
import pytest

from errors import CollapsedPair, Disconnected, DimensionMismatch, TooLarge, UsageError
from graph_factory import (
    CoordinateEmbedding, FiniteMetric, diamond, distortion, distortion_between, hypercube_metric,
    is_series_parallel, l1_embed, laakso, metric_from_embedding, shortest_path_metric, write_edge_list,
    write_embedding,
)


def brute_force_distortion(images, dist):
    expand, contract = 0.0, 0.0
    for u, v in itertools.combinations(range(len(images)), 2):
        d_target = float(np.sum(np.abs(images[u] - images[v])))
        expand = max(expand, d_target / dist[u, v])
        contract = max(contract, dist[u, v] / d_target)
    return expand * contract


@pytest.mark.parametrize('k, n, m, anti', [(1, 2, 1, {}), (2, 4, 4, {2: 1}), (3, 12, 16, {2: 1, 3: 4})])
def test_diamond_counts(k, n, m, anti):
    g = diamond(k)
    assert (g.n, len(g.edges)) == (n, m)
    assert {level: len(pairs) for level, pairs in g.anti_edges.items()} == anti


@pytest.mark.parametrize('k, n, m', [(1, 2, 1), (2, 6, 6), (3, 30, 36)])
def test_laakso_counts(k, n, m):
    g = laakso(k)
    assert (g.n, len(g.edges)) == (n, m)


def test_count_recurrences():
    for build, kmax, branching, added in ((diamond, 6, 4, 2), (laakso, 5, 6, 4)):
        previous = build(1)
        for k in range(2, kmax + 1):
            g = build(k)
            assert len(g.edges) == branching ** (k - 1)
            assert g.n == previous.n + added * branching ** (k - 2)
            assert g.graph.number_of_edges() == len(g.edges)
            previous = g


def test_edge_budget():
    with pytest.raises(TooLarge):
        laakso(4, budget_edges=100)
    with pytest.raises(UsageError):
        diamond(0)


def test_provenance_levels():
    g = diamond(3)
    assert g.provenance[:2] == (1, 1)
    assert sum(1 for level in g.provenance if level == 3) == 8


@pytest.mark.parametrize('build, k', [(diamond, 3), (diamond, 4), (laakso, 2), (laakso, 3)])
def test_series_parallel(build, k):
    assert is_series_parallel(build(k))


@pytest.mark.parametrize('k', [1, 2, 3, 4, 5])
def test_diamond_source_sink_distance(k):
    g = diamond(k)
    assert shortest_path_metric(g).dist[g.source, g.sink] == 2 ** (k - 1)


@pytest.mark.parametrize('k', [1, 2, 3, 4])
def test_laakso_source_sink_distance(k):
    g = laakso(k)
    assert shortest_path_metric(g).dist[g.source, g.sink] == 4 ** (k - 1)


@pytest.mark.parametrize('build, k, base', [
    (diamond, 2, 2), (diamond, 3, 2), (diamond, 4, 2), (laakso, 2, 4), (laakso, 3, 4),
])
def test_anti_edges_span_their_quadrilaterals(build, k, base):
    g = build(k)
    dist = shortest_path_metric(g).dist
    for level, pairs in g.anti_edges.items():
        for a, b in pairs:
            u, v = g.generators[(a, b)]
            assert dist[a, b] == 2 * dist[a, u] == 2 * base ** (k - level)
            assert dist[a, u] == dist[b, u] == dist[a, v] == dist[b, v]


def test_graph_metric_is_a_metric():
    assert shortest_path_metric(laakso(3)).satisfies_triangle()


def test_metric_point_cap():
    with pytest.raises(TooLarge):
        shortest_path_metric(laakso(3), max_points=10)


def test_disconnected_graph_rejected():
    g = diamond(2)
    broken = nx.Graph(g.graph)
    broken.remove_edges_from(list(broken.edges(g.sink)))
    with pytest.raises(Disconnected):
        shortest_path_metric(replace(g, graph=broken))


def test_finite_metric_validation():
    with pytest.raises(UsageError):
        FiniteMetric(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(DimensionMismatch):
        FiniteMetric(np.zeros((2, 3)))


def test_l1_embed_single_edge_is_isometric():
    g = diamond(1)
    assert distortion(l1_embed(g), shortest_path_metric(g)).value == 1.0


@pytest.mark.parametrize('build, k', [(diamond, 2), (diamond, 3), (diamond, 4), (laakso, 2), (laakso, 3)])
def test_l1_embed_distortion_at_most_two(build, k):
    g = build(k)
    f = l1_embed(g)
    assert np.issubdtype(f.images.dtype, np.integer)
    assert distortion(f, shortest_path_metric(g)).value <= 2 + 1e-9


def test_l1_embed_matches_brute_force():
    g = diamond(2)
    f = l1_embed(g)
    dist = shortest_path_metric(g).dist
    result = distortion(f, shortest_path_metric(g))
    assert result.value == pytest.approx(brute_force_distortion(f.images, dist), rel=1e-12)


def test_distortion_identity_and_scaling():
    metric = shortest_path_metric(diamond(3))
    assert distortion_between(metric, metric).value == 1.0
    f = l1_embed(diamond(3))
    base = distortion(f, metric).value
    assert distortion(f.scaled(3.5), metric).value == pytest.approx(base, rel=1e-12)


def test_distortion_collapsed_pair():
    f = CoordinateEmbedding('l1', np.array([[0], [1], [1]]))
    metric = FiniteMetric(np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]]))
    with pytest.raises(CollapsedPair):
        distortion(f, metric)


def test_schatten_target_metric():
    images = np.stack([np.eye(2), np.zeros((2, 2)), np.diag([1.0, 0.0])])
    metric = metric_from_embedding(CoordinateEmbedding('schatten', images, q=1.0))
    assert metric.dist[0, 1] == pytest.approx(2.0)
    assert metric.dist[0, 2] == pytest.approx(1.0)


def test_hypercube_metric_examples():
    assert hypercube_metric(1, 1).dist[0, 1] == 2.0
    assert set(np.unique(hypercube_metric(2, 1).dist)) == {0.0, 2.0, 4.0}
    assert hypercube_metric(3, 1.5).dist[0, 7] == pytest.approx(2 * 3 ** (2 / 3))
    with pytest.raises(TooLarge):
        hypercube_metric(13, 1)


def test_write_edge_list(tmp_path):
    g = diamond(2)
    path = tmp_path / 'graphs' / 'diamond_2.edges'
    write_edge_list(str(path), g)
    lines = path.read_text().splitlines()
    assert lines[0] == '# diamond 2 4 4'
    assert len(lines) == 5


@pytest.mark.parametrize('build, k', [(diamond, 3), (laakso, 2)])
def test_write_embedding_reloads(tmp_path, build, k):
    g = build(k)
    path = tmp_path / 'graphs' / 'embedding.json'
    write_embedding(str(path), l1_embed(g))
    data = json.loads(path.read_text())
    assert sorted(data, key=int) == [str(v) for v in range(g.n)]
    reloaded = CoordinateEmbedding('l1', np.array([data[str(v)] for v in range(g.n)]))
    assert distortion(reloaded, shortest_path_metric(g)).value <= 2 + 1e-12
