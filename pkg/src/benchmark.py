"""
Timing of modularity density evaluation on sparse connected graphs of
growing edge count
"""
import logging
import time
from typing import List, Optional

import numpy as np

from src.config import get_settings
from src.graph import Graph, Partition
from src.metrics import modularity_density_value
from src.models import BenchPoint, BenchReport

logger = logging.getLogger(__name__)

# average degree of the bench graphs
EDGES_PER_NODE = 4


def sparse_connected_graph(edges: int, seed: int) -> Graph:
    """Ring backbone over edges/EDGES_PER_NODE nodes topped up with uniform random edges"""
    rng = np.random.default_rng(seed)
    n = max(3, edges // EDGES_PER_NODE)
    ring_src = np.arange(n)
    ring_dst = (ring_src + 1) % n
    keys = np.minimum(ring_src, ring_dst) * n + np.maximum(ring_src, ring_dst)

    wanted = min(edges, n * (n - 1) // 2)
    while keys.shape[0] < wanted:
        extra = int((wanted - keys.shape[0]) * 1.2) + 16
        u = rng.integers(n, size=extra)
        v = rng.integers(n, size=extra)
        fresh = np.minimum(u, v) * n + np.maximum(u, v)
        fresh = fresh[u != v]
        # keep first occurrences so the ring stays intact
        merged = np.concatenate([keys, fresh])
        _, first = np.unique(merged, return_index=True)
        keys = merged[np.sort(first)]
    keys = keys[:wanted]
    return Graph(n, keys // n, keys % n)


def block_partition(node_count: int, block: int = 32) -> Partition:
    return Partition(np.arange(node_count) // block)


def time_metric(g: Graph, p: Partition, repeats: int) -> float:
    """Best wall time of `repeats` evaluations"""
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        modularity_density_value(g, p)
        best = min(best, time.perf_counter() - start)
    return best


def run_bench(
    max_edges: Optional[int] = None,
    seed: Optional[int] = None,
    min_edges: Optional[int] = None,
    steps: Optional[int] = None,
    repeats: Optional[int] = None,
) -> BenchReport:
    """Time M at geometric edge counts and fit the log-log slope"""
    settings = get_settings()
    max_edges = max_edges or settings.bench_max_edges
    min_edges = min(min_edges or settings.bench_min_edges, max_edges)
    steps = steps or settings.bench_steps
    repeats = repeats or settings.bench_repeats
    seed = settings.seed if seed is None else seed

    counts = np.unique(np.geomspace(min_edges, max_edges, steps).astype(np.int64))
    points: List[BenchPoint] = []
    for index, edges in enumerate(counts):
        g = sparse_connected_graph(int(edges), seed + index)
        p = block_partition(g.node_count)
        seconds = time_metric(g, p, repeats)
        points.append(BenchPoint(edges=g.edge_count, nodes=g.node_count, clusters=p.cluster_count, seconds=seconds))
        logger.info("|E| = %d: %.4fs", g.edge_count, seconds)

    slope = None
    if len(points) >= 2:
        x = np.log([pt.edges for pt in points])
        y = np.log([max(pt.seconds, 1e-9) for pt in points])
        slope = float(np.polyfit(x, y, 1)[0])
    return BenchReport(seed=seed, points=points, slope=slope)
