"""
Closed-form metric computations: modularity density M (sum and tensor
forms), Li's modularity density D, bridge thresholds and the analytic
quantities of the synthetic families
"""
import logging
import math
from typing import List, Sequence

import numpy as np
import pandas as pd

from src.errors import ParameterError, PartitionError
from src.graph import ClusterStats, Graph, Partition, cluster_stats, is_connected
from src.models import (
    AnalyticQuantity,
    ClusterReport,
    Family,
    GeneratorSpec,
    MetricName,
    MetricReport,
    ThresholdResult,
)

logger = logging.getLogger(__name__)


def _pairwise_separation(stats: ClusterStats, scale: np.ndarray) -> np.ndarray:
    """Σ_{c' != c} boundary(c, c') * scale(c, c') per cluster, over nonzero pairs only"""
    rows, cols, weights = stats.boundary_pairs()
    terms = weights * scale
    k = stats.cluster_count
    return np.bincount(rows, weights=terms, minlength=k) + np.bincount(cols, weights=terms, minlength=k)


def _report(
    metric: MetricName,
    p: Partition,
    cohesion: np.ndarray,
    separation: np.ndarray,
    connected: bool,
) -> MetricReport:
    values = cohesion - separation
    clusters = [
        ClusterReport(
            id=p.label_of(c),
            size=int(p.sizes[c]),
            M_c=float(values[c]),
            cohesion=float(cohesion[c]),
            separation=float(separation[c]),
        )
        for c in range(p.cluster_count)
    ]
    return MetricReport(metric=metric, M=float(values.sum()), connected=connected, clusters=clusters)


def _connected_flag(g: Graph) -> bool:
    connected = is_connected(g)
    if not connected:
        logger.warning("Graph is disconnected; the metric is computed globally")
    return connected


def modularity_density_sum(g: Graph, p: Partition, stats: ClusterStats = None) -> MetricReport:
    """M = Σ_c { internal(c)/n_c - Σ_{c' != c} boundary(c, c')/√(n_c n_c') }"""
    stats = stats if stats is not None else cluster_stats(g, p)
    sizes = p.sizes.astype(np.float64)
    cohesion = stats.internal_weight / sizes
    rows, cols, _ = stats.boundary_pairs()
    separation = _pairwise_separation(stats, 1.0 / np.sqrt(sizes[rows] * sizes[cols]))
    return _report(MetricName.M, p, cohesion, separation, _connected_flag(g))


def modularity_density_value(g: Graph, p: Partition) -> float:
    """M from the sum form without building a report"""
    stats = cluster_stats(g, p)
    sizes = p.sizes.astype(np.float64)
    rows, cols, weights = stats.boundary_pairs()
    cohesion = float((stats.internal_weight / sizes).sum())
    separation = 2.0 * float((weights / np.sqrt(sizes[rows] * sizes[cols])).sum())
    return cohesion - separation


def modularity_density_tensor(g: Graph, p: Partition) -> float:
    """M = 2 Σ_c n̂_c·T·n̂_c - N·T·N with N = Σ_c n̂_c"""
    p.validate_for(g)
    T = g.adjacency
    U = p.indicator_matrix()
    N = p.aggregate_vector()
    intra = float((T @ U).multiply(U).sum())
    cross = float(N @ (T @ N))
    return 2.0 * intra - cross


class NormalizedDegreeVector:
    """d_c = n̂_c·T: d_{c_j} = (Σ_{i∈c} T_ij)/√n_c"""

    def __init__(self, cluster: int, values: np.ndarray):
        self.cluster = cluster
        self.values = values
        self.values.setflags(write=False)

    def dot(self, vector: np.ndarray) -> float:
        return float(self.values @ vector)

    def __getitem__(self, node: int) -> float:
        return float(self.values[node])

    def __len__(self) -> int:
        return int(self.values.shape[0])


def normalized_degree_vector(g: Graph, p: Partition, c: int) -> NormalizedDegreeVector:
    p.validate_for(g)
    if c < 0 or c >= p.cluster_count:
        raise PartitionError(f"unknown cluster id {c}")
    values = np.asarray(g.adjacency @ p.unit_vector(c)).reshape(-1)
    return NormalizedDegreeVector(c, values)


def li_modularity_density(g: Graph, p: Partition, stats: ClusterStats = None) -> MetricReport:
    """D = Σ_c (internal(c) - external(c))/n_c"""
    stats = stats if stats is not None else cluster_stats(g, p)
    sizes = p.sizes.astype(np.float64)
    cohesion = stats.internal_weight / sizes
    separation = stats.external_weight / sizes
    return _report(MetricName.D, p, cohesion, separation, _connected_flag(g))


def li_modularity_density_value(g: Graph, p: Partition) -> float:
    stats = cluster_stats(g, p)
    sizes = p.sizes.astype(np.float64)
    return float(((stats.internal_weight - stats.external_weight) / sizes).sum())


def evaluate(g: Graph, p: Partition, metric: MetricName = MetricName.M) -> MetricReport:
    if MetricName(metric) == MetricName.D:
        return li_modularity_density(g, p)
    return modularity_density_sum(g, p)


def metric_value(g: Graph, p: Partition, metric: MetricName = MetricName.M) -> float:
    if MetricName(metric) == MetricName.D:
        return li_modularity_density_value(g, p)
    return modularity_density_value(g, p)


# ---------------------------------------------------------------------------
# Bridge thresholds for two cliques
# ---------------------------------------------------------------------------

def _check_clique_sizes(m: int, n: int) -> None:
    if m < 3 or n < 3:
        raise ParameterError(f"clique sizes must be >= 3, got m={m}, n={n}")


def w_threshold_M(m: int, n: int) -> float:
    """Largest bridge total below which maximizing M keeps K_m and K_n apart"""
    _check_clique_sizes(m, n)
    return (n * (m - 1) + m * (n - 1)) / (2.0 * (1.0 + (m + n) / math.sqrt(m * n)))


def w_threshold_D(m: int, n: int) -> float:
    """Same limiting value for Li's D"""
    _check_clique_sizes(m, n)
    return (n * (m - 1) + m * (n - 1)) / (2.0 * (1.0 + (m + n) ** 2 / (2.0 * m * n)))


def threshold_ratio(m: int, n: int) -> float:
    """w_M/w_D - 1 in closed form; exactly 0 when m == n"""
    _check_clique_sizes(m, n)
    x = (m + n) / math.sqrt(m * n)
    return ((m + n) ** 2 / (2.0 * m * n) - x) / (1.0 + x)


def threshold_result(m: int, n: int) -> ThresholdResult:
    return ThresholdResult(
        m=m, n=n, w_M=w_threshold_M(m, n), w_D=w_threshold_D(m, n), ratio_minus_one=threshold_ratio(m, n)
    )


def threshold_grid(sizes: Sequence[int]) -> pd.DataFrame:
    """Rows (m, n, w_M, w_D, ratio_minus_one) for every pair of sizes"""
    rows = [threshold_result(m, n).model_dump() for m in sizes for n in sizes]
    return pd.DataFrame(rows, columns=["m", "n", "w_M", "w_D", "ratio_minus_one"])


# ---------------------------------------------------------------------------
# Closed forms of the synthetic families (expected values for p < 1)
# ---------------------------------------------------------------------------

def min_edge_probability(m: int) -> float:
    """Fewest edges of a natural community is a ring: m / (m(m-1)/2)"""
    if m < 3:
        raise ParameterError(f"m must be >= 3, got {m}")
    return 2.0 / (m - 1)


def er_single(m: int, p: float) -> float:
    return p * (m - 1)


def er_split(m: int, m1: int, p: float) -> float:
    m2 = m - m1
    return p * (m - 2) - 2.0 * p * math.sqrt(m1 * m2)


def two_community_single(m: int, n: int, p_m: float, p_n: float, bridges: int = 1) -> float:
    return (p_m * (m - 1) * m + p_n * (n - 1) * n + 2.0 * bridges) / (m + n)


def two_community_sep(m: int, n: int, p_m: float, p_n: float, bridges: int = 1) -> float:
    return p_m * (m - 1) + p_n * (n - 1) - 2.0 * bridges / math.sqrt(m * n)


def two_community_li_sep(m: int, n: int, p_m: float, p_n: float, bridges: int = 1) -> float:
    return p_m * (m - 1) + p_n * (n - 1) - bridges / m - bridges / n


def ring_sep(sizes: Sequence[int], probs: Sequence[float]) -> float:
    r = len(sizes)
    value = sum(p * (m - 1) for m, p in zip(sizes, probs))
    for i in range(r):
        value -= 2.0 / math.sqrt(sizes[i] * sizes[(i + 1) % r])
    return value


def ring_merge(sizes: Sequence[int], probs: Sequence[float], k: int) -> float:
    """Communities 0..k merged, the remaining ones kept separate (1 <= k <= r-2)"""
    r = len(sizes)
    if not 1 <= k <= r - 2:
        raise ParameterError(f"k must lie in 1..{r - 2}, got {k}")
    merged = sum(sizes[: k + 1])
    value = (2.0 * k + sum(p * (m - 1) * m for m, p in zip(sizes[: k + 1], probs[: k + 1]))) / merged
    value += sum(p * (m - 1) for m, p in zip(sizes[k + 1 :], probs[k + 1 :]))
    for i in range(k + 1, r - 1):
        value -= 2.0 / math.sqrt(sizes[i] * sizes[i + 1])
    value -= (2.0 / math.sqrt(merged)) * (1.0 / math.sqrt(sizes[k + 1]) + 1.0 / math.sqrt(sizes[-1]))
    return value


def ring_merge_all(sizes: Sequence[int], probs: Sequence[float]) -> float:
    # every ring bridge, the closing one included, becomes internal
    r = len(sizes)
    return (2.0 * r + sum(p * (m - 1) * m for m, p in zip(sizes, probs))) / sum(sizes)


def ring_merge_lower_bound(sizes: Sequence[int], k: int) -> float:
    """Bound on M_sep - M_merge^k with ΔI^k at its p_min value 2k"""
    r = len(sizes)
    merged = sum(sizes[: k + 1])
    bound = 2.0 * k - 2.0 * k / merged
    for i in range(k + 1):
        bound -= 2.0 / math.sqrt(sizes[i] * sizes[(i + 1) % r])
    bound -= 2.0 / math.sqrt(sizes[0] * sizes[-1])
    bound += (2.0 / math.sqrt(merged)) * (1.0 / math.sqrt(sizes[k + 1]) + 1.0 / math.sqrt(sizes[-1]))
    return bound


def analytic_suite(family: GeneratorSpec) -> List[AnalyticQuantity]:
    """Every closed-form quantity derived for the family.

    For p < 1 these are unconditioned expectations. Generated samples are
    conditioned on each community being connected, which raises their mean
    degree noticeably when m(1-p)^(m-1) is not small (m=5, p=0.5 for one).
    """
    sizes = list(family.sizes)
    probs = list(family.probs or [1.0] * len(sizes))
    out: List[AnalyticQuantity] = []

    def emit(name: str, value: float) -> None:
        out.append(AnalyticQuantity(quantity=name, closed_form_value=float(value)))

    for m in sizes:
        if m < 3:
            raise ParameterError(f"community size {m} < 3")
    for m, p in zip(sizes, probs):
        if not min_edge_probability(m) - 1e-12 <= p <= 1.0:
            raise ParameterError(f"p={p} outside [{min_edge_probability(m)}, 1] for m={m}")

    if family.family == Family.ER_SINGLE:
        m, p = sizes[0], probs[0]
        emit("p_min", min_edge_probability(m))
        emit("expected_total_degree", p * m * (m - 1))
        emit("M_single", er_single(m, p))
        for m1 in range(1, m // 2 + 1):
            emit(f"M_split(m1={m1})", er_split(m, m1, p))
            emit(f"M_single-M_split(m1={m1})", p * (1.0 + 2.0 * math.sqrt(m1 * (m - m1))))

    elif family.family == Family.TWO_COMMUNITIES_BRIDGED:
        (m, n), (p_m, p_n) = sizes, probs
        single = two_community_single(m, n, p_m, p_n)
        sep = two_community_sep(m, n, p_m, p_n)
        emit("p_min_m", min_edge_probability(m))
        emit("p_min_n", min_edge_probability(n))
        emit("M_single", single)
        emit("M_sep", sep)
        emit("delta_M", sep - single)
        emit("delta_I", (p_m * (m - 1) * n + p_n * (n - 1) * m) / (m + n))
        emit("delta_I_min", 2.0)
        emit("delta_M_lower_bound", 1.0)

    elif family.family == Family.RING_OF_COMMUNITIES:
        sep = ring_sep(sizes, probs)
        emit("M_sep", sep)
        for k in range(1, len(sizes) - 1):
            merged = ring_merge(sizes, probs, k)
            head = sizes[: k + 1]
            head_probs = probs[: k + 1]
            delta_i = sum(p * (m - 1) for m, p in zip(head, head_probs)) - sum(
                p * (m - 1) * m for m, p in zip(head, head_probs)
            ) / sum(head)
            emit(f"M_merge(k={k})", merged)
            emit(f"delta_M(k={k})", sep - merged)
            emit(f"delta_I(k={k})", delta_i)
            emit(f"delta_I_min(k={k})", 2.0 * k)
            emit(f"delta_M_lower_bound(k={k})", ring_merge_lower_bound(sizes, k))
        merged_all = ring_merge_all(sizes, probs)
        emit("M_merge_all", merged_all)
        emit("delta_M_all", sep - merged_all)

    elif family.family == Family.TWO_CLIQUES_W_BRIDGE:
        m, n = sizes
        w = family.bridge_count
        merge = two_community_single(m, n, 1.0, 1.0, bridges=w)
        sep = two_community_sep(m, n, 1.0, 1.0, bridges=w)
        li_sep = two_community_li_sep(m, n, 1.0, 1.0, bridges=w)
        emit("M_merge", merge)
        emit("M_sep", sep)
        emit("delta_M", sep - merge)
        emit("D_merge", merge)
        emit("D_sep", li_sep)
        emit("delta_D", li_sep - merge)
        emit("w_M", w_threshold_M(m, n))
        emit("w_D", w_threshold_D(m, n))

    return out


def analytic_values(family: GeneratorSpec) -> dict:
    """analytic_suite as a {quantity: value} dict"""
    return {q.quantity: q.closed_form_value for q in analytic_suite(family)}
