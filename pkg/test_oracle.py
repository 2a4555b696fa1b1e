"""
Tests for the exhaustive partition search and the inequality checks
"""
import numpy as np
import pytest

from src.errors import OracleSizeError, ParameterError
from src.generators import gen_ring
from src.graph import Graph, Partition
from src.metrics import modularity_density_tensor
from src.models import Claim, Family, GeneratorSpec, MetricName
from src.oracle import bell_number, exhaustive_best, oracle_agrees, restricted_growth_strings, verify_inequality


def _is_growth_string(row):
    top = -1
    for value in row:
        if value > top + 1:
            return False
        top = max(top, value)
    return row[0] == 0


def test_bell_numbers():
    assert [bell_number(n) for n in range(8)] == [1, 1, 2, 5, 15, 52, 203, 877]


@pytest.mark.parametrize("batch_rows", [4, 64, 1 << 18])
def test_growth_strings_enumerate_each_partition_once(batch_rows):
    rows = np.concatenate(list(restricted_growth_strings(6, batch_rows)))
    assert rows.shape == (203, 6)
    assert len({tuple(r) for r in rows.tolist()}) == 203
    assert all(_is_growth_string(r) for r in rows.tolist())
    assert rows.tolist() == sorted(rows.tolist())


def test_k4_stays_whole(k4):
    result = exhaustive_best(k4)
    assert result.best_partition == [0, 0, 0, 0]
    assert result.best_value == pytest.approx(3.0)
    assert result.partitions_evaluated == 15
    assert len(result.ties) == 1


def test_two_triangles_split(two_triangles):
    result = exhaustive_best(two_triangles, MetricName.M)
    assert result.best_partition == [0, 0, 0, 1, 1, 1]
    assert result.best_value == pytest.approx(10 / 3)
    li = exhaustive_best(two_triangles, MetricName.D)
    assert li.best_value >= 10 / 3 - 1e-12


def test_ring_of_three_triangles():
    labeled = gen_ring([3, 3, 3], [1.0] * 3, seed=0)
    result = exhaustive_best(labeled.graph)
    assert Partition(result.best_partition) == labeled.truth
    assert result.best_value == pytest.approx(4.0)


def test_edgeless_graph_ties_are_listed_in_order():
    result = exhaustive_best(Graph(3, [], []))
    assert result.best_value == 0.0
    assert len(result.ties) == 5
    assert result.ties[0] == [0, 0, 0]
    assert result.ties == sorted(result.ties)


def test_size_limit():
    g = Graph.from_edges([(i, i + 1) for i in range(12)])
    with pytest.raises(OracleSizeError):
        exhaustive_best(g)
    with pytest.raises(OracleSizeError):
        exhaustive_best(Graph.from_edges([(0, 1), (1, 2), (2, 3)]), max_nodes=3)


def test_oracle_agrees(two_triangles, two_triangles_split):
    assert oracle_agrees(two_triangles, two_triangles_split)
    assert not oracle_agrees(two_triangles, Partition.whole(6))


@pytest.mark.parametrize("m", range(3, 9))
def test_no_split_on_cliques(m):
    checks = verify_inequality(GeneratorSpec(family=Family.ER_SINGLE, sizes=[m]), Claim.NO_SPLIT)
    assert all(c.passed for c in checks)
    assert any(c.claim_id == "no_split(oracle)" for c in checks)


def test_sep_beats_merge_k_on_ring():
    spec = GeneratorSpec(family=Family.RING_OF_COMMUNITIES, sizes=[3, 4, 5, 6])
    checks = verify_inequality(spec, Claim.SEP_BEATS_MERGE_K)
    assert checks and all(c.passed and c.margin > 0 for c in checks)


def test_sep_beats_merge_bound():
    checks = verify_inequality(GeneratorSpec(family=Family.TWO_COMMUNITIES_BRIDGED, sizes=[3, 3]), Claim.SEP_BEATS_MERGE)
    assert all(c.passed for c in checks)
    assert checks[0].observed["M_sep"] - checks[0].observed["M_single"] == pytest.approx(1.0, abs=1e-12)


def test_threshold_sweep_on_equal_triangles():
    spec = GeneratorSpec(family=Family.TWO_CLIQUES_W_BRIDGE, sizes=[3, 3], bridge_count=0)
    checks = verify_inequality(spec, Claim.THRESHOLD_W)
    assert all(c.passed for c in checks)
    by_w = {int(c.observed["w"]): c.observed["delta"] for c in checks}
    assert by_w[1] > 0
    assert by_w[2] == pytest.approx(0.0, abs=1e-12)
    assert all(c.passed for c in verify_inequality(spec, Claim.THRESHOLD_W_D))


def test_claim_needs_matching_family():
    with pytest.raises(ParameterError):
        verify_inequality(GeneratorSpec(family=Family.ER_SINGLE, sizes=[4]), Claim.THRESHOLD_W)


@pytest.mark.parametrize(
    "g",
    [
        Graph.from_edges([(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]),
        Graph.from_edges([(0, 1, 2.0), (1, 2, 0.5), (2, 3, 1.5), (3, 0, 0.25), (1, 3, 3.0), (3, 4, 1.0)]),
        gen_ring([3, 3, 3], [1.0, 1.0, 1.0], seed=2).graph,
    ],
)
def test_best_value_matches_tensor_form(g):
    result = exhaustive_best(g, MetricName.M)
    assert result.best_value == pytest.approx(modularity_density_tensor(g, Partition(result.best_partition)), abs=1e-9)


def test_result_carries_node_labels():
    g = Graph.from_edges([(0, 1), (1, 2), (0, 2), (2, 3)], labels=["10", "20", "30", "40"])
    result = exhaustive_best(g)
    assert result.node_labels == ["10", "20", "30", "40"]
    assert len(result.best_partition) == len(result.node_labels)


def test_random_no_split_sample_runs_oracle():
    spec = GeneratorSpec(family=Family.ER_SINGLE, sizes=[6], probs=[0.6], seed=3)
    checks = verify_inequality(spec, Claim.NO_SPLIT)
    oracle = [c for c in checks if c.claim_id == "no_split(oracle)"]
    assert len(oracle) == 1
    assert oracle[0].statistical
    assert oracle[0].partition is not None and len(oracle[0].partition) == 6
    assert oracle[0].observed["partitions"] == bell_number(6)


def test_clique_no_split_is_not_statistical():
    checks = verify_inequality(GeneratorSpec(family=Family.ER_SINGLE, sizes=[5]), Claim.NO_SPLIT)
    oracle = [c for c in checks if c.claim_id == "no_split(oracle)"][0]
    assert not oracle.statistical
    assert oracle.passed
    assert oracle.partition == [0] * 5


@pytest.mark.parametrize("sizes", [[3, 3, 3], [3, 4, 5], [4, 6, 3, 5]])
def test_ring_lower_bound_holds_on_instances(sizes):
    checks = verify_inequality(GeneratorSpec(family=Family.RING_OF_COMMUNITIES, sizes=sizes), Claim.SEP_BEATS_MERGE_K)
    bounds = [c for c in checks if c.claim_id.startswith("sep_beats_merge_k_bound")]
    assert len(bounds) == len(sizes) - 2
    for check in bounds:
        assert check.passed
        assert check.observed["delta_M"] >= check.observed["lower_bound"] - 1e-9
