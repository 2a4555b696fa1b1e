"""
Tests for the greedy modularity density detector
"""
import pytest

from src.detector import _ClusterState, compare_detectors, detect, rand_index
from src.errors import ParameterError
from src.generators import gen_ring, gen_two_cliques_w, generate
from src.graph import Graph, Partition
from src.metrics import li_modularity_density_value, modularity_density_value
from src.models import DetectorConfig, Family, GeneratorSpec, InitMode, MetricName, MoveOrder
from src.oracle import exhaustive_best


def _clique(m):
    return Graph.from_edges([(i, j) for i in range(m) for j in range(i + 1, m)])


def test_two_triangles_recovers_truth(two_triangles, two_triangles_split):
    partition, report, trace = detect(two_triangles)
    assert partition == two_triangles_split
    assert report.M == pytest.approx(10 / 3)
    assert trace


def test_clique_stays_whole():
    partition, report, _ = detect(_clique(6))
    assert partition.cluster_count == 1
    assert report.M == pytest.approx(5.0)


def test_ring_of_cliques_recovers_truth():
    labeled = gen_ring([3, 4, 5], [1.0] * 3, seed=0)
    partition, _, _ = detect(labeled.graph)
    assert partition == labeled.truth


def test_trace_is_strictly_monotone(two_triangles):
    cfg = DetectorConfig(move_order=MoveOrder.SHUFFLED, seed=5)
    _, report, trace = detect(two_triangles, cfg)
    values = [step.value for step in trace]
    assert all(step.gain > cfg.min_gain for step in trace)
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(report.M)
    assert [step.step for step in trace] == list(range(len(trace)))


def test_validated_steps_match_recomputation():
    labeled = gen_ring([3, 4, 5], [1.0] * 3, seed=2)
    plain, _, trace = detect(labeled.graph)
    checked, report, checked_trace = detect(labeled.graph, DetectorConfig(validate_steps=True))
    assert plain == checked
    assert [s.value for s in trace] == pytest.approx([s.value for s in checked_trace])
    assert report.M == pytest.approx(modularity_density_value(labeled.graph, checked))


def test_detect_is_idempotent(two_triangles):
    found, _, _ = detect(two_triangles)
    again, _, trace = detect(two_triangles, DetectorConfig(init=InitMode.GIVEN_PARTITION), initial=found)
    assert again == found
    assert trace == []


def test_given_partition_requires_initial(two_triangles):
    with pytest.raises(ParameterError):
        detect(two_triangles, DetectorConfig(init=InitMode.GIVEN_PARTITION))


def test_max_passes_bounds_the_run(two_triangles):
    _, _, trace = detect(two_triangles, DetectorConfig(max_passes=1))
    assert {step.pass_index for step in trace} == {0}


@pytest.mark.parametrize(
    "spec",
    [
        GeneratorSpec(family=Family.ER_SINGLE, sizes=[5]),
        GeneratorSpec(family=Family.TWO_COMMUNITIES_BRIDGED, sizes=[3, 4]),
        GeneratorSpec(family=Family.TWO_COMMUNITIES_BRIDGED, sizes=[4, 5], seed=1),
        GeneratorSpec(family=Family.RING_OF_COMMUNITIES, sizes=[3, 3, 3]),
    ],
)
def test_detector_reaches_oracle_optimum(spec):
    labeled = generate(spec)
    _, report, _ = detect(labeled.graph)
    assert report.M == pytest.approx(exhaustive_best(labeled.graph).best_value)


def test_li_objective_tracks_exact_value(two_triangles):
    partition, report, trace = detect(two_triangles, DetectorConfig(metric=MetricName.D, validate_steps=True))
    assert report.metric == MetricName.D
    assert report.M == pytest.approx(li_modularity_density_value(two_triangles, partition))
    assert trace[-1].value == pytest.approx(report.M)


def test_rand_index():
    a = Partition([0, 0, 1, 1])
    assert rand_index(a, a) == 1.0
    assert rand_index(Partition.whole(4), Partition.singletons(4)) == 0.0
    # pairs: (0,1) together in both, (2,3) apart vs together, the rest apart in both
    assert rand_index(a, Partition([0, 0, 1, 2])) == pytest.approx(5 / 6)


def test_compare_between_the_thresholds():
    # w_D(5, 25) < 27 < w_M(5, 25)
    labeled = gen_two_cliques_w(5, 25, 27, seed=0)
    cfg = DetectorConfig(init=InitMode.GIVEN_PARTITION)
    comparison = compare_detectors(labeled.graph, [MetricName.M, MetricName.D], cfg, truth=labeled.truth)
    by_metric = {o.metric: o for o in comparison.outcomes}
    assert by_metric[MetricName.M].exact_match
    assert by_metric[MetricName.M].rand_index == 1.0
    assert by_metric[MetricName.D].cluster_count == 1
    assert not by_metric[MetricName.D].exact_match
    assert comparison.connected


def test_compare_on_disconnected_cliques():
    labeled = gen_two_cliques_w(4, 6, 0, seed=0)
    comparison = compare_detectors(
        labeled.graph, cfg=DetectorConfig(init=InitMode.GIVEN_PARTITION), truth=labeled.truth
    )
    assert not comparison.connected
    assert all(o.exact_match for o in comparison.outcomes)


def test_tiny_boundary_weights_are_kept():
    g = Graph.from_edges([(0, 1, 1.0), (1, 2, 1e-13)])
    state = _ClusterState(g, Partition([0, 1, 1]), MetricName.M)
    state.apply_move(1, 0, state.links(1))
    assert state.boundary_pairs() == [(0, 1)]
    assert state.boundary[0][1] == pytest.approx(1e-13, rel=1e-2)
    assert state.crossings[0][1] == 1


def test_boundary_pair_disappears_with_last_crossing_edge():
    g = Graph.from_edges([(0, 1, 1e-15), (1, 2, 1.0)])
    state = _ClusterState(g, Partition([0, 1, 1]), MetricName.M)
    state.apply_move(0, 1, state.links(0))
    assert state.boundary_pairs() == []
    assert 0 not in state.sizes


def test_comparison_carries_node_labels():
    g = Graph.from_edges([(0, 1), (1, 2), (0, 2)], labels=["a", "b", "c"])
    comparison = compare_detectors(g)
    assert comparison.node_labels == ["a", "b", "c"]
