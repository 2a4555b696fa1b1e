"""
Greedy maximizer of modularity density: local node moves followed by
agglomerative merges of boundary-connected clusters
"""
import logging
import math
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ParameterError
from src.graph import Graph, Partition, cluster_stats, is_connected
from src.metrics import evaluate, metric_value
from src.models import (
    DetectorComparison,
    DetectorConfig,
    DetectorOutcome,
    InitMode,
    MetricName,
    MetricReport,
    MoveOrder,
    TraceStep,
)

logger = logging.getLogger(__name__)


def _cohesion(internal: float, size: int) -> float:
    return internal / size if size > 0 else 0.0


def _pair_m(weight: float, first: int, second: int) -> float:
    if first == 0 or second == 0 or weight == 0.0:
        return 0.0
    return 2.0 * weight / math.sqrt(first * second)


def _pair_d(weight: float, first: int, second: int) -> float:
    if first == 0 or second == 0 or weight == 0.0:
        return 0.0
    return weight * (1.0 / first + 1.0 / second)


class _ClusterState:
    """Sizes, internal weights and boundary weights of the current clustering.

    Both objectives decompose as Σ_c internal(c)/n_c minus a sum of pair
    terms over boundary-connected cluster pairs, so a move or merge only
    touches the pairs involving the clusters it changes.
    """

    def __init__(self, g: Graph, p: Partition, metric: MetricName):
        self.graph = g
        self.metric = metric
        self.pair_term = _pair_d if metric == MetricName.D else _pair_m
        stats = cluster_stats(g, p)
        self.assignment = p.assignment.astype(np.int64).copy()
        self.sizes: Dict[int, int] = {c: int(n) for c, n in enumerate(p.sizes)}
        self.internal: Dict[int, float] = {c: float(w) for c, w in enumerate(stats.internal_weight)}
        self.boundary: Dict[int, Dict[int, float]] = {c: {} for c in self.sizes}
        # cross-edge counts decide when a boundary pair disappears; weights may be arbitrarily small
        self.crossings: Dict[int, Dict[int, int]] = {c: {} for c in self.sizes}
        for a, b, w in stats.pairs():
            self.boundary[a][b] = w
        for u, v, _ in g.edges():
            a, b = int(self.assignment[u]), int(self.assignment[v])
            if a != b:
                self.crossings[a][b] = self.crossings[a].get(b, 0) + 1
                self.crossings[b][a] = self.crossings[a][b]
                self.boundary[a].setdefault(b, 0.0)
                self.boundary[b].setdefault(a, 0.0)
        self.next_id = p.cluster_count
        self.value = metric_value(g, p, metric)

    def links(self, node: int) -> Dict[int, float]:
        """Weight from node to each cluster it touches"""
        return self._node_links(node)[0]

    def _node_links(self, node: int) -> Tuple[Dict[int, float], Dict[int, int]]:
        neighbors, weights = self.graph.neighbors(node)
        totals: Dict[int, float] = defaultdict(float)
        counts: Dict[int, int] = defaultdict(int)
        for cluster, weight in zip(self.assignment[neighbors], weights):
            totals[int(cluster)] += float(weight)
            counts[int(cluster)] += 1
        return totals, counts

    def _add_boundary(self, first: int, second: int, delta: float, edges: int) -> None:
        count = self.crossings[first].get(second, 0) + edges
        if count <= 0:
            for a, b in ((first, second), (second, first)):
                self.boundary[a].pop(b, None)
                self.crossings[a].pop(b, None)
            return
        value = max(self.boundary[first].get(second, 0.0) + delta, 0.0)
        self.boundary[first][second] = self.boundary[second][first] = value
        self.crossings[first][second] = self.crossings[second][first] = count

    def _terms(self, clusters: Iterable[int], sizes: Dict[int, int], internal: Dict[int, float],
               boundary: Dict[Tuple[int, int], float]) -> float:
        total = sum(_cohesion(internal.get(c, 0.0), sizes.get(c, 0)) for c in clusters)
        for (a, b), w in boundary.items():
            size_a = sizes.get(a, self.sizes.get(a, 0))
            size_b = sizes.get(b, self.sizes.get(b, 0))
            total -= self.pair_term(w, size_a, size_b)
        return total

    def move_gain(self, node: int, target: int, links: Dict[int, float]) -> float:
        source = int(self.assignment[node])
        n_s, n_t = self.sizes[source], self.sizes.get(target, 0)
        i_s, i_t = self.internal[source], self.internal.get(target, 0.0)
        b_s, b_t = self.boundary[source], self.boundary.get(target, {})
        k_s, k_t = links.get(source, 0.0), links.get(target, 0.0)

        others = (set(b_s) | set(b_t)) - {source, target}
        before_pairs = {(source, target): b_s.get(target, 0.0)}
        after_pairs = {(source, target): b_s.get(target, 0.0) + k_s - k_t}
        for c in others:
            k_c = links.get(c, 0.0)
            before_pairs[(source, c)] = b_s.get(c, 0.0)
            before_pairs[(target, c)] = b_t.get(c, 0.0)
            after_pairs[(source, c)] = b_s.get(c, 0.0) - k_c
            after_pairs[(target, c)] = b_t.get(c, 0.0) + k_c

        before = self._terms(
            (source, target), {source: n_s, target: n_t}, {source: i_s, target: i_t}, before_pairs
        )
        after = self._terms(
            (source, target),
            {source: n_s - 1, target: n_t + 1},
            {source: i_s - 2.0 * k_s, target: i_t + 2.0 * k_t},
            after_pairs,
        )
        return after - before

    def apply_move(self, node: int, target: int, links: Dict[int, float]) -> None:
        source = int(self.assignment[node])
        if target not in self.sizes:
            self.sizes[target] = 0
            self.internal[target] = 0.0
            self.boundary[target] = {}
            self.crossings[target] = {}
            self.next_id = max(self.next_id, target + 1)
        _, counts = self._node_links(node)
        for cluster, weight in links.items():
            edges = counts[cluster]
            if cluster == source:
                self.internal[source] -= 2.0 * weight
                self._add_boundary(source, target, weight, edges)
            elif cluster == target:
                self.internal[target] += 2.0 * weight
                self._add_boundary(source, target, -weight, -edges)
            else:
                self._add_boundary(source, cluster, -weight, -edges)
                self._add_boundary(target, cluster, weight, edges)
        self.sizes[source] -= 1
        self.sizes[target] += 1
        self.assignment[node] = target
        if self.sizes[source] == 0:
            self._drop(source)

    def merge_gain(self, first: int, second: int) -> float:
        b_f, b_s = self.boundary[first], self.boundary[second]
        others = (set(b_f) | set(b_s)) - {first, second}
        before_pairs = {(first, second): b_f.get(second, 0.0)}
        after_pairs: Dict[Tuple[int, int], float] = {}
        for c in others:
            before_pairs[(first, c)] = b_f.get(c, 0.0)
            before_pairs[(second, c)] = b_s.get(c, 0.0)
            after_pairs[(first, c)] = b_f.get(c, 0.0) + b_s.get(c, 0.0)

        n_f, n_s = self.sizes[first], self.sizes[second]
        before = self._terms(
            (first, second), {first: n_f, second: n_s},
            {first: self.internal[first], second: self.internal[second]}, before_pairs,
        )
        merged_internal = self.internal[first] + self.internal[second] + 2.0 * b_f.get(second, 0.0)
        after = self._terms((first,), {first: n_f + n_s}, {first: merged_internal}, after_pairs)
        return after - before

    def apply_merge(self, first: int, second: int) -> None:
        self.internal[first] += self.internal[second] + 2.0 * self.boundary[first].get(second, 0.0)
        for a, b in ((first, second), (second, first)):
            self.boundary[a].pop(b, None)
            self.crossings[a].pop(b, None)
        for cluster, weight in list(self.boundary[second].items()):
            self._add_boundary(first, cluster, weight, self.crossings[second][cluster])
        self.sizes[first] += self.sizes[second]
        self.assignment[self.assignment == second] = first
        self._drop(second)

    def _drop(self, cluster: int) -> None:
        for other in list(self.boundary[cluster]):
            self.boundary[other].pop(cluster, None)
            self.crossings[other].pop(cluster, None)
        del self.sizes[cluster], self.internal[cluster], self.boundary[cluster], self.crossings[cluster]

    def boundary_pairs(self) -> List[Tuple[int, int]]:
        return sorted((a, b) for a, row in self.boundary.items() for b in row if a < b)

    def partition(self) -> Partition:
        return Partition(self.assignment)


class _Run:
    """One detector run: the passes, the trace and optional step validation"""

    def __init__(self, g: Graph, state: _ClusterState, cfg: DetectorConfig):
        self.graph = g
        self.state = state
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.trace: List[TraceStep] = []

    def _record(self, pass_index: int, kind: str, node: Optional[int], source: int, target: int, gain: float) -> None:
        self.state.value += gain
        self.trace.append(
            TraceStep(
                step=len(self.trace),
                pass_index=pass_index,
                kind=kind,
                node=node,
                source=source,
                target=target,
                gain=gain,
                value=self.state.value,
            )
        )
        logger.debug(
            "Step %d (%s): %d -> %d, gain %.6g, value %.6g",
            len(self.trace) - 1, kind, source, target, gain, self.state.value,
        )
        if self.cfg.validate_steps:
            exact = metric_value(self.graph, self.state.partition(), self.cfg.metric)
            if abs(exact - self.state.value) > 1e-9 * max(1.0, abs(exact)):
                logger.error("Incremental value %.12g drifted from recomputed %.12g", self.state.value, exact)
                self.state.value = exact

    def _node_order(self) -> np.ndarray:
        order = np.arange(self.graph.node_count)
        if self.cfg.move_order == MoveOrder.SHUFFLED:
            self.rng.shuffle(order)
        return order

    def _best_move(self, node: int) -> Tuple[Optional[int], float]:
        state = self.state
        source = int(state.assignment[node])
        links = state.links(node)
        candidates = sorted(c for c in links if c != source)
        if state.sizes[source] > 1:
            candidates.append(state.next_id)
        best_target, best_gain = None, self.cfg.min_gain
        for target in candidates:
            gain = state.move_gain(node, target, links)
            if gain > best_gain:
                best_target, best_gain = target, gain
        return best_target, best_gain

    def local_moves(self, pass_index: int) -> int:
        accepted = 0
        while True:
            moved = 0
            for node in self._node_order():
                node = int(node)
                target, gain = self._best_move(node)
                if target is None:
                    continue
                source = int(self.state.assignment[node])
                self.state.apply_move(node, target, self.state.links(node))
                self._record(pass_index, "move", node, source, target, gain)
                moved += 1
            accepted += moved
            if moved == 0:
                return accepted

    def merges(self, pass_index: int) -> int:
        accepted = 0
        while True:
            best_pair, best_gain = None, self.cfg.min_gain
            for first, second in self.state.boundary_pairs():
                gain = self.state.merge_gain(first, second)
                if gain > best_gain:
                    best_pair, best_gain = (first, second), gain
            if best_pair is None:
                return accepted
            self.state.apply_merge(*best_pair)
            self._record(pass_index, "merge", None, best_pair[1], best_pair[0], best_gain)
            accepted += 1


def detect(
    g: Graph, cfg: Optional[DetectorConfig] = None, initial: Optional[Partition] = None
) -> Tuple[Partition, MetricReport, List[TraceStep]]:
    """Greedily maximize M (or Li's D) and return the partition, its report and the accepted-step trace"""
    cfg = cfg or DetectorConfig()
    if cfg.init == InitMode.GIVEN_PARTITION:
        if initial is None:
            raise ParameterError("init 'given-partition' needs an initial partition")
        initial.validate_for(g)
        start = initial
    else:
        start = Partition.singletons(g.node_count)

    run = _Run(g, _ClusterState(g, start, cfg.metric), cfg)
    for pass_index in range(cfg.max_passes):
        steps = run.local_moves(pass_index) + run.merges(pass_index)
        logger.info("Pass %d: %d accepted steps, %s = %.6g", pass_index, steps, cfg.metric.value, run.state.value)
        if steps == 0:
            break
    else:
        logger.warning("Detector stopped after max_passes=%d with steps still improving", cfg.max_passes)

    partition = run.state.partition()
    return partition, evaluate(g, partition, cfg.metric), run.trace


def rand_index(first: Partition, second: Partition) -> float:
    """Fraction of node pairs on which two partitions agree (together or apart)"""
    if first.node_count != second.node_count:
        raise ParameterError("partitions cover different node counts")
    n = first.node_count
    if n < 2:
        return 1.0
    pairs = np.stack([first.assignment, second.assignment], axis=1)
    _, joint = np.unique(pairs, axis=0, return_counts=True)

    def together(counts: np.ndarray) -> float:
        counts = counts.astype(np.float64)
        return float(np.sum(counts * (counts - 1.0) / 2.0))

    total = n * (n - 1) / 2.0
    both = together(joint)
    agree = total + 2.0 * both - together(first.sizes) - together(second.sizes)
    return agree / total


def compare_detectors(
    g: Graph,
    metrics: Sequence[MetricName] = (MetricName.M, MetricName.D),
    cfg: Optional[DetectorConfig] = None,
    truth: Optional[Partition] = None,
    initial: Optional[Partition] = None,
) -> DetectorComparison:
    """Run the detector once per objective and report agreement with the truth"""
    cfg = cfg or DetectorConfig()
    if cfg.init == InitMode.GIVEN_PARTITION and initial is None:
        initial = truth
    outcomes = []
    for metric in metrics:
        found, report, _ = detect(g, cfg.model_copy(update={"metric": MetricName(metric)}), initial)
        outcomes.append(
            DetectorOutcome(
                metric=MetricName(metric),
                assignment=found.assignment.tolist(),
                value=report.M,
                cluster_count=found.cluster_count,
                exact_match=None if truth is None else found == truth,
                rand_index=None if truth is None else rand_index(found, truth),
            )
        )
    return DetectorComparison(
        connected=is_connected(g), outcomes=outcomes, node_labels=[str(label) for label in g.labels]
    )
