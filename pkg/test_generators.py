"""
Tests for the seeded synthetic generators
"""
import numpy as np
import pytest
from pydantic import ValidationError
from scipy.sparse.csgraph import connected_components

from src.errors import ParameterError
from src.generators import PRNG_NAME, gen_er, gen_ring, gen_two_cliques_w, gen_two_communities, generate
from src.graph import Partition, is_connected
from src.metrics import modularity_density_value
from src.models import Family, GeneratorSpec


def test_er_clique_limit():
    g = gen_er(4, 1.0, seed=0)
    assert g.edge_count == 6


def test_er_at_minimum_probability_is_connected():
    for seed in range(20):
        g = gen_er(5, 0.5, seed=seed)
        assert is_connected(g)
        assert g.edge_count >= 4


def test_er_mean_edge_count():
    counts = [gen_er(10, 0.4, seed=seed).edge_count for seed in range(1000)]
    # connected samples only, so slightly above p*m(m-1)/2 = 18
    assert 17.5 <= np.mean(counts) <= 19.5


def test_er_rejects_probability_below_minimum():
    with pytest.raises(ParameterError):
        gen_er(5, 0.3, seed=0)


def test_same_seed_same_graph():
    a = gen_two_communities(6, 8, 0.6, 0.5, seed=42)
    b = gen_two_communities(6, 8, 0.6, 0.5, seed=42)
    np.testing.assert_array_equal(a.graph.sources, b.graph.sources)
    np.testing.assert_array_equal(a.graph.targets, b.graph.targets)
    c = gen_two_communities(6, 8, 0.6, 0.5, seed=43)
    assert not (
        np.array_equal(a.graph.sources, c.graph.sources) and np.array_equal(a.graph.targets, c.graph.targets)
    )


def test_two_communities_structure():
    labeled = gen_two_communities(3, 3, 1.0, 1.0, seed=0)
    assert labeled.graph.edge_count == 7
    assert labeled.truth == Partition([0, 0, 0, 1, 1, 1])


def test_two_communities_split_beats_merge():
    labeled = gen_two_communities(3, 9, 1.0, 1.0, seed=5)
    g = labeled.graph
    assert modularity_density_value(g, labeled.truth) > modularity_density_value(g, Partition.whole(12))


def test_truth_communities_are_connected():
    labeled = gen_two_communities(7, 9, 2 / 6, 0.25, seed=1)
    for cluster in range(2):
        members = labeled.truth.members(cluster)
        sub = labeled.graph.induced_adjacency(members)
        assert connected_components(sub, directed=False)[0] == 1


def test_ring_of_cliques():
    labeled = gen_ring([3, 3, 3], [1.0, 1.0, 1.0], seed=0)
    assert labeled.graph.edge_count == 12
    assert is_connected(labeled.graph)
    assert labeled.truth.sizes.tolist() == [3, 3, 3]


def test_ring_needs_three_communities():
    with pytest.raises(ParameterError):
        gen_ring([3, 3], [1.0, 1.0], seed=0)


def test_two_cliques_bridges():
    one = gen_two_cliques_w(3, 3, 1, seed=0)
    g = one.graph
    assert modularity_density_value(g, one.truth) - modularity_density_value(g, Partition.whole(6)) == pytest.approx(1.0)

    at_threshold = gen_two_cliques_w(3, 3, 2, seed=0).graph
    delta = modularity_density_value(at_threshold, one.truth) - modularity_density_value(at_threshold, Partition.whole(6))
    assert delta == pytest.approx(0.0, abs=1e-12)

    full = gen_two_cliques_w(3, 3, 9, seed=0)
    assert full.graph.edge_count == 15
    assert modularity_density_value(full.graph, Partition.whole(6)) > modularity_density_value(full.graph, full.truth)


def test_two_cliques_without_bridges_is_disconnected():
    labeled = gen_two_cliques_w(4, 5, 0, seed=0)
    assert labeled.graph.edge_count == 16
    assert not is_connected(labeled.graph)


def test_two_cliques_rejects_too_many_bridges():
    with pytest.raises(ParameterError):
        gen_two_cliques_w(3, 3, 10, seed=0)


def test_generate_dispatch_and_metadata():
    spec = GeneratorSpec(family=Family.RING_OF_COMMUNITIES, sizes=[3, 4, 5], seed=3)
    labeled = generate(spec)
    meta = labeled.metadata()
    assert meta.prng == PRNG_NAME
    assert meta.node_count == 12
    assert meta.spec.seed == 3
    assert meta.to_dict()["schema_version"] == "1.0"


@pytest.mark.parametrize(
    "kwargs",
    [
        {"family": "er_single", "sizes": [2]},
        {"family": "er_single", "sizes": [5], "probs": [0.2]},
        {"family": "er_single", "sizes": [5, 5]},
        {"family": "ring_of_communities", "sizes": [3, 3]},
        {"family": "two_cliques_w_bridge", "sizes": [3, 3], "probs": [0.9, 1.0]},
        {"family": "two_cliques_w_bridge", "sizes": [3, 3], "bridge_count": 10},
        {"family": "two_communities_bridged", "sizes": [3, 3], "seed": -1},
    ],
)
def test_generator_spec_validation(kwargs):
    with pytest.raises(ValidationError):
        GeneratorSpec(**kwargs)


@pytest.mark.parametrize(
    "spec",
    [
        GeneratorSpec(family=Family.TWO_COMMUNITIES_BRIDGED, sizes=[4, 6]),
        GeneratorSpec(family=Family.RING_OF_COMMUNITIES, sizes=[3, 4, 5]),
        GeneratorSpec(family=Family.TWO_CLIQUES_W_BRIDGE, sizes=[4, 5], bridge_count=3),
    ],
)
def test_truth_value_does_not_depend_on_bridge_endpoints(spec):
    values, bridges = [], set()
    for seed in range(8):
        labeled = generate(spec.model_copy(update={"seed": seed}))
        truth = labeled.truth.assignment
        crossing = frozenset((u, v) for u, v, _ in labeled.graph.edges() if truth[u] != truth[v])
        bridges.add(crossing)
        values.append(modularity_density_value(labeled.graph, labeled.truth))
    assert len(bridges) > 1
    np.testing.assert_allclose(values, values[0], rtol=0, atol=1e-12)
