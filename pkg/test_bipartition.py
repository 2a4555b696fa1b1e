"""
Tests for the direct and decomposed change of M under a cluster split
"""
import math

import numpy as np
import pytest

from src.bipartition import (
    BipartitionProposal,
    SubgraphLaplacian,
    delta_i_direct,
    delta_m_decomposed,
    delta_m_direct,
    laplacian_identity_check,
    quadratic_form_residual,
)
from src.errors import PartitionError
from src.graph import Graph, Partition
from src.verification import random_instance


def test_natural_split_of_merged_triangles(two_triangles):
    whole = Partition.whole(6)
    prop = BipartitionProposal.from_side(whole, 0, [0, 1, 2])
    assert delta_m_direct(two_triangles, whole, prop) == pytest.approx(1.0)
    assert delta_m_direct(two_triangles, whole, prop, method="full") == pytest.approx(1.0)

    result = delta_m_decomposed(two_triangles, whole, prop)
    assert result.delta_m == pytest.approx(1.0)
    assert result.beta == 0.0
    assert result.alpha == pytest.approx(1.0)
    assert result.fDf == pytest.approx(7 / 3)
    assert result.fLf == pytest.approx(2 / 3)
    assert result.delta_I_c == pytest.approx(5 / 3)
    assert not result.degenerate


def test_clique_split_loses(k4):
    whole = Partition.whole(4)
    prop = BipartitionProposal.from_side(whole, 0, [0, 1])
    assert delta_m_direct(k4, whole, prop) == pytest.approx(-5.0)
    assert delta_m_decomposed(k4, whole, prop).delta_m == pytest.approx(-5.0)


def test_empty_side_is_rejected(k4):
    whole = Partition.whole(4)
    with pytest.raises(PartitionError, match="empty"):
        BipartitionProposal.from_side(whole, 0, [])
    with pytest.raises(PartitionError, match="empty"):
        BipartitionProposal.from_side(whole, 0, [0, 1, 2, 3])
    with pytest.raises(PartitionError, match="not in cluster"):
        BipartitionProposal.from_side(Partition([0, 0, 1, 1]), 0, [2])


def test_f_vector_and_delta_n(two_triangles):
    p = Partition([0, 0, 0, 0, 1, 1])
    prop = BipartitionProposal.from_side(p, 0, [3])
    result = delta_m_decomposed(two_triangles, p, prop)
    f = np.array([result.f[node] for node in range(4)])
    assert f @ f == pytest.approx(1.0, abs=1e-12)
    assert abs(f.sum()) <= 1e-12
    assert sorted(set(np.round(f, 12))) == pytest.approx([-math.sqrt(1 / 12), math.sqrt(3 / 4)])
    assert result.delta_N[3] == pytest.approx(1.0 - 0.5)
    assert result.delta_N[0] == pytest.approx(1 / math.sqrt(3) - 0.5)
    assert result.beta > 0.0
    assert result.delta_m == pytest.approx(delta_m_direct(two_triangles, p, prop))


def test_isolated_cluster_has_no_penalty():
    g = Graph.from_edges([(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])
    p = Partition([0, 0, 0, 1, 1, 1])
    result = delta_m_decomposed(g, p, BipartitionProposal.from_side(p, 0, [0]))
    assert result.beta == 0.0


def test_split_without_cross_edges():
    g = Graph.from_edges([(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])
    whole = Partition.whole(6)
    prop = BipartitionProposal.from_side(whole, 0, [0, 1, 2])
    assert laplacian_identity_check(g, whole, prop) == 0.0
    assert delta_m_decomposed(g, whole, prop).fLf == pytest.approx(0.0)


def test_edgeless_cluster_falls_back_to_direct_path():
    path = Graph.from_edges([(0, 1), (1, 2)])
    p = Partition([0, 1, 0])
    prop = BipartitionProposal.from_side(p, 0, [0])
    result = delta_m_decomposed(path, p, prop)
    assert result.degenerate
    assert result.lambda_ is None
    assert result.to_dict()["lambda"] is None
    assert result.delta_m == pytest.approx(-4.0 + 2.0 * math.sqrt(2.0))


def test_delta_i_matches_adjacency_form(two_triangles):
    p = Partition([0, 0, 0, 0, 1, 1])
    prop = BipartitionProposal.from_side(p, 0, [0, 3])
    result = delta_m_decomposed(two_triangles, p, prop)
    assert delta_i_direct(two_triangles, p, prop) == pytest.approx(result.fDf - result.fLf)


def test_laplacian_properties():
    rng = np.random.default_rng(3)
    rows, cols = np.triu_indices(15, k=1)
    keep = rng.random(rows.shape[0]) < 0.4
    g = Graph(15, rows[keep], cols[keep], rng.uniform(0.1, 2.0, int(keep.sum())))
    laplacian = SubgraphLaplacian(g, np.arange(2, 13))
    assert laplacian.row_sum_residual() <= 1e-12
    for _ in range(20):
        x = rng.normal(size=laplacian.size)
        assert quadratic_form_residual(laplacian, x) <= 1e-9


def test_direct_equals_decomposed_on_random_instances():
    for seed in range(300):
        g, p, prop = random_instance(seed)
        direct = delta_m_direct(g, p, prop)
        assert delta_m_direct(g, p, prop, method="full") == pytest.approx(direct, abs=1e-9)
        result = delta_m_decomposed(g, p, prop)
        assert abs(result.delta_m - direct) <= 1e-9 * max(1.0, abs(direct)), seed
        assert result.beta >= -1e-12
        assert min(result.delta_N.values()) >= 0.0
        assert laplacian_identity_check(g, p, prop) <= 1e-9
