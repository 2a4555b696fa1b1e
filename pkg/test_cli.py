"""
Tests for the command-line entry point, run in-process
"""
import json

import pandas as pd
import pytest

from src.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, _canonical_key, main

TWO_TRIANGLES = "0 1\n0 2\n1 2\n3 4\n3 5\n4 5\n2 3\n"
SPLIT = "0 a\n1 a\n2 a\n3 b\n4 b\n5 b\n"
MERGED = "".join(f"{node} 0\n" for node in range(6))


@pytest.fixture
def graph_file(write_file):
    return write_file("graph.txt", TWO_TRIANGLES)


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_metric_sum(graph_file, write_file, capsys):
    partition = write_file("split.txt", SPLIT)
    assert main(["metric", str(graph_file), str(partition)]) == EXIT_OK
    report = _stdout_json(capsys)
    assert report["M"] == pytest.approx(10 / 3)
    assert report["connected"] is True
    assert len(report["clusters"]) == 2


def test_metric_li(graph_file, write_file, capsys):
    partition = write_file("split.txt", SPLIT)
    assert main(["metric", str(graph_file), str(partition), "--metric", "D"]) == EXIT_OK
    assert _stdout_json(capsys)["M"] == pytest.approx(10 / 3)


def test_metric_both_forms(graph_file, write_file, capsys):
    partition = write_file("split.txt", SPLIT)
    assert main(["metric", str(graph_file), str(partition), "--form", "both"]) == EXIT_OK
    report = _stdout_json(capsys)
    assert report["residual"] == pytest.approx(0.0, abs=1e-9)


def test_metric_li_tensor_rejected(graph_file, write_file, capsys):
    partition = write_file("split.txt", SPLIT)
    assert main(["metric", str(graph_file), str(partition), "--metric", "D", "--form", "tensor"]) == EXIT_INPUT
    assert "sum form" in capsys.readouterr().err


def test_metric_missing_file(tmp_path, capsys):
    assert main(["metric", str(tmp_path / "none.txt"), str(tmp_path / "p.txt")]) == EXIT_INPUT
    assert "not found" in capsys.readouterr().err


def test_metric_bad_graph(write_file, capsys):
    graph = write_file("bad.txt", "0 1\n1 1\n")
    partition = write_file("p.txt", "0 0\n1 0\n")
    assert main(["metric", str(graph), str(partition)]) == EXIT_INPUT
    assert "self-loop" in capsys.readouterr().err


def test_generate_then_metric(tmp_path, capsys):
    out = tmp_path / "inst"
    code = main(["generate", "two_cliques_w_bridge", "--sizes", "4", "5", "--w", "2", "--seed", "3", "--output-dir", str(out)])
    assert code == EXIT_OK
    metadata = _stdout_json(capsys)
    assert metadata["node_count"] == 9
    assert metadata["edge_count"] == 6 + 10 + 2
    for name in ("graph.txt", "truth.txt", "metadata.json", "analytic.csv"):
        assert (out / name).exists()

    assert main(["metric", str(out / "graph.txt"), str(out / "truth.txt")]) == EXIT_OK
    report = _stdout_json(capsys)
    # cohesion 3 + 4, separation 2 * 2 / sqrt(20)
    assert report["M"] == pytest.approx(7 - 4 / 20 ** 0.5)


def test_generate_invalid_spec(tmp_path, capsys):
    code = main(["generate", "er_single", "--sizes", "2", "--output-dir", str(tmp_path / "x")])
    assert code == EXIT_INPUT
    assert not (tmp_path / "x").exists()


def test_threshold_csv(capsys):
    assert main(["threshold", "--sizes", "3", "4"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "m,n,w_M,w_D,ratio_minus_one"
    assert len(lines) == 5


def test_threshold_output_file(tmp_path):
    path = tmp_path / "grid.csv"
    assert main(["threshold", "--max-size", "6", "--output", str(path)]) == EXIT_OK
    frame = pd.read_csv(path)
    assert len(frame) == 16
    diagonal = frame[frame["m"] == frame["n"]]
    assert (diagonal["ratio_minus_one"].abs() < 1e-9).all()


def test_verify_identity_ndjson(capsys):
    assert main(["verify", "--suite", "bipartition-identity", "--seeds", "20"]) == EXIT_OK
    captured = capsys.readouterr()
    records = [json.loads(line) for line in captured.out.strip().splitlines()]
    assert len(records) == 20
    assert all(r["schema_version"] == "1.0" for r in records)
    assert all(r["passed"] for r in records)
    assert "0 failed" in captured.err


def test_oracle(graph_file, capsys):
    assert main(["oracle", str(graph_file)]) == EXIT_OK
    result = _stdout_json(capsys)
    assert result["best_partition"] == [0, 0, 0, 1, 1, 1]
    assert result["best_value"] == pytest.approx(10 / 3)
    assert result["partitions_evaluated"] == 203


def test_oracle_size_limit(graph_file, capsys):
    assert main(["oracle", str(graph_file), "--max-nodes", "4"]) == EXIT_INPUT


def test_bipartition(graph_file, write_file, capsys):
    partition = write_file("merged.txt", MERGED)
    side = write_file("side.txt", "0\n1\n2\n")
    assert main(["bipartition", str(graph_file), str(partition), str(side)]) == EXIT_OK
    result = _stdout_json(capsys)
    assert result["delta_m"] == pytest.approx(1.0)
    assert result["fDf"] == pytest.approx(7 / 3)
    assert result["fLf"] == pytest.approx(2 / 3)
    assert result["beta"] == pytest.approx(0.0)
    assert "lambda" in result


def test_bipartition_unknown_node(graph_file, write_file, capsys):
    partition = write_file("merged.txt", MERGED)
    side = write_file("side.txt", "0\n9\n")
    assert main(["bipartition", str(graph_file), str(partition), str(side)]) == EXIT_INPUT


def test_detect_writes_outputs(graph_file, tmp_path, capsys):
    out = tmp_path / "found.txt"
    trace = tmp_path / "trace.csv"
    code = main(["detect", str(graph_file), "--output", str(out), "--trace", str(trace), "--validate-steps"])
    assert code == EXIT_OK
    report = _stdout_json(capsys)
    assert report["M"] == pytest.approx(10 / 3)

    clusters = {}
    for line in out.read_text(encoding="utf-8").splitlines():
        node, cluster = line.split()
        clusters.setdefault(cluster, set()).add(node)
    assert sorted(map(sorted, clusters.values())) == [["0", "1", "2"], ["3", "4", "5"]]

    steps = pd.read_csv(trace)
    assert list(steps.columns) == ["step", "pass_index", "kind", "node", "source", "target", "gain", "value"]
    assert steps["value"].iloc[-1] == pytest.approx(10 / 3)


def test_detect_given_partition_needs_file(graph_file, capsys):
    assert main(["detect", str(graph_file), "--init", "given-partition"]) == EXIT_INPUT


def test_compare(graph_file, write_file, capsys):
    truth = write_file("truth.txt", SPLIT)
    assert main(["compare", str(graph_file), "--truth", str(truth)]) == EXIT_OK
    comparison = _stdout_json(capsys)
    assert [o["metric"] for o in comparison["outcomes"]] == ["M", "D"]
    assert comparison["outcomes"][0]["exact_match"] is True


def test_bench_small(tmp_path, capsys):
    csv = tmp_path / "bench.csv"
    code = main(["bench", "--edges", "2000", "--min-edges", "500", "--steps", "3", "--repeats", "1", "--csv", str(csv)])
    assert code == EXIT_OK
    report = _stdout_json(capsys)
    assert len(report["points"]) == 3
    assert report["slope"] is not None
    assert len(pd.read_csv(csv)) == 3


def test_seed_from_environment(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("MODDENS_SEED", "11")
    out = tmp_path / "inst"
    assert main(["generate", "er_single", "--sizes", "6", "--probs", "0.6", "--output-dir", str(out)]) == EXIT_OK
    assert _stdout_json(capsys)["spec"]["seed"] == 11


def test_verify_failure_exit_code_constant():
    assert EXIT_FAILED == 1


def _record(claim_id, **family):
    return {"claim_id": claim_id, "family": family}


def test_verify_order_is_numeric():
    records = [
        _record("threshold_w(w=10)", sizes=[3]),
        _record("threshold_w(w=2)", sizes=[3]),
        _record("no_split", sizes=[12], seed=0),
        _record("no_split", sizes=[3], seed=10),
        _record("no_split", sizes=[3], seed=9),
    ]
    ordered = sorted(records, key=_canonical_key)
    assert [r["claim_id"] for r in ordered[-2:]] == ["threshold_w(w=2)", "threshold_w(w=10)"]
    assert [(r["family"]["sizes"], r["family"]["seed"]) for r in ordered[:3]] == [([3], 9), ([3], 10), ([12], 0)]


def test_oracle_reports_node_labels(write_file, capsys):
    graph = write_file("named.txt", "x y\ny z\nx z\nz w\n")
    assert main(["oracle", str(graph)]) == EXIT_OK
    result = _stdout_json(capsys)
    assert sorted(result["node_labels"]) == ["w", "x", "y", "z"]
    assert len(result["node_labels"]) == len(result["best_partition"])


def test_bipartition_reports_node_labels(graph_file, write_file, capsys):
    partition = write_file("merged.txt", MERGED)
    side = write_file("side.txt", "0\n1\n2\n")
    assert main(["bipartition", str(graph_file), str(partition), str(side)]) == EXIT_OK
    assert _stdout_json(capsys)["node_labels"] == ["0", "1", "2", "3", "4", "5"]
