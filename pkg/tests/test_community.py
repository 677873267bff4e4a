import networkx as nx
import numpy as np
import pytest

from sbmanon.community import (
    DetectedPartition,
    detect_communities,
    jaccard,
    label_agreement,
    match_communities,
    modularity,
)
from sbmanon.graph import CommunityLabeling, Graph
from sbmanon.synth import SbmParams, sample_sbm

from conftest import random_graph


def two_cliques(k=6):
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    edges += [(i + k, j + k) for i, j in edges]
    edges.append((0, k))
    return Graph(2 * k, edges)


def test_modularity_matches_networkx(rng):
    for _ in range(5):
        g = random_graph(rng, 40, 0.15)
        L = CommunityLabeling.from_partition(rng.integers(0, 4, 40))
        nxg = nx.Graph()
        nxg.add_nodes_from(range(40))
        nxg.add_edges_from(g.edges.tolist())
        parts = [set(c.tolist()) for c in L.communities()]
        assert modularity(g, L) == pytest.approx(nx.community.modularity(nxg, parts), abs=1e-12)


def test_modularity_edge_cases():
    assert modularity(Graph(4), CommunityLabeling([0, 1, 2, 3])) == 0.0
    g = two_cliques()
    assert modularity(g, CommunityLabeling(np.zeros(12, dtype=int))) == pytest.approx(0.0)


def test_louvain_splits_two_cliques():
    g = two_cliques()
    part = detect_communities(g, 0)
    assert part.labeling.C == 2
    assert label_agreement(part.labeling, CommunityLabeling.equal_blocks(12, 2)) == 1.0
    assert part.modularity == pytest.approx(modularity(g, part.labeling))


def test_louvain_is_seed_deterministic():
    g, _ = sample_sbm(SbmParams(n=300, C=3, a=15, b=2), 4)
    a = detect_communities(g, 9)
    b = detect_communities(g, 9)
    assert a.labeling == b.labeling and a.modularity == b.modularity


def test_louvain_never_below_singletons(rng):
    for s in range(5):
        g = random_graph(rng, 60, 0.08)
        part = detect_communities(g, s)
        singletons = modularity(g, CommunityLabeling(np.arange(60)))
        assert part.modularity >= singletons - 1e-12


def test_louvain_edgeless_graph():
    part = detect_communities(Graph(5), 0)
    assert part.labeling.C == 5 and part.modularity == 0.0 and part.count == 0


def test_size_filter():
    part = DetectedPartition(CommunityLabeling([0, 0, 0, 0, 1, 1, 2]), 0.0, 3)
    assert list(part.true_communities()) == [0] and part.count == 1


def test_jaccard():
    assert jaccard({1, 2, 3}, {2, 3, 4}) == 0.5
    assert jaccard([], []) == 1.0
    assert jaccard({1}, set()) == 0.0


def test_match_identical_partitions():
    g, _ = sample_sbm(SbmParams(n=200, C=2, a=20, b=1), 1)
    part = detect_communities(g, 0)
    cmp = match_communities(part, part)
    assert np.all(cmp.best_jaccard == 1.0)
    assert cmp.preservation[0.1] == part.count
    assert list(cmp.base_sizes) == sorted(cmp.base_sizes, reverse=True)


def test_match_hand_example():
    base = DetectedPartition(CommunityLabeling([0] * 6 + [1] * 4), 0.0, 4)
    other = DetectedPartition(CommunityLabeling([0] * 5 + [1] * 5), 0.0, 4)
    cmp = match_communities(base, other, eps=(0.1, 0.2))
    assert list(cmp.base_index) == [0, 1]
    assert cmp.best_jaccard == pytest.approx([5 / 6, 4 / 5])
    assert cmp.preservation == {0.1: 0, 0.2: 2}
    with pytest.raises(ValueError):
        match_communities(base, DetectedPartition(CommunityLabeling([0] * 3), 0.0))


def test_label_agreement():
    truth = CommunityLabeling.equal_blocks(8, 2)
    assert label_agreement(CommunityLabeling([1, 1, 1, 1, 0, 0, 0, 0]), truth) == 1.0
    assert label_agreement(CommunityLabeling([1, 1, 1, 0, 0, 0, 0, 0]), truth) == 7 / 8
    many = CommunityLabeling(np.arange(24) // 2)
    shuffled = CommunityLabeling.from_partition((np.arange(24) // 2 * 7) % 12)
    assert label_agreement(shuffled, many, exact_limit=5) == 1.0
