"""
Change in modularity density when one cluster is split in two, computed
directly and through its Laplacian decomposition
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from src.config import get_settings
from src.errors import ParameterError, PartitionError
from src.graph import Graph, Partition
from src.metrics import modularity_density_value
from src.models import BipartitionEval

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BipartitionProposal:
    """Cluster c split into side_a and side_b (both sorted node ids)"""
    cluster: int
    side_a: Tuple[int, ...]
    side_b: Tuple[int, ...]

    @classmethod
    def from_side(cls, p: Partition, cluster: int, side_a: Sequence[int]) -> "BipartitionProposal":
        """Side b is the rest of the cluster"""
        members = p.members(cluster)
        chosen = np.unique(np.asarray(list(side_a), dtype=np.int64))
        outside = np.setdiff1d(chosen, members)
        if outside.size:
            raise PartitionError(f"nodes {outside.tolist()} are not in cluster {cluster}")
        rest = np.setdiff1d(members, chosen)
        proposal = cls(cluster=int(cluster), side_a=tuple(int(x) for x in chosen), side_b=tuple(int(x) for x in rest))
        proposal.validate_for(p)
        return proposal

    @property
    def n_a(self) -> int:
        return len(self.side_a)

    @property
    def n_b(self) -> int:
        return len(self.side_b)

    def validate_for(self, p: Partition) -> None:
        if not self.side_a or not self.side_b:
            raise PartitionError(f"bipartition of cluster {self.cluster} leaves a side empty")
        if set(self.side_a) & set(self.side_b):
            raise PartitionError("the two sides overlap")
        members = p.members(self.cluster)
        if not np.array_equal(np.sort(np.array(self.side_a + self.side_b)), members):
            raise PartitionError(f"sides do not cover exactly the members of cluster {self.cluster}")

    def apply(self, p: Partition) -> Partition:
        return p.split(self.cluster, self.side_a)


class SubgraphLaplacian:
    """Induced adjacency T^c, degree matrix D^c and Laplacian L^c = D^c - T^c
    of one cluster, all sparse and indexed by position in `members`"""

    def __init__(self, g: Graph, members: np.ndarray):
        self.members = np.asarray(members, dtype=np.int64)
        self.adjacency = g.induced_adjacency(self.members)
        self.degrees = np.asarray(self.adjacency.sum(axis=1)).reshape(-1)
        self.degree_matrix = sp.diags(self.degrees, format="csr")
        self.laplacian = (self.degree_matrix - self.adjacency).tocsr()

    @classmethod
    def of_cluster(cls, g: Graph, p: Partition, cluster: int) -> "SubgraphLaplacian":
        return cls(g, p.members(cluster))

    @property
    def size(self) -> int:
        return int(self.members.shape[0])

    def quadratic(self, x: np.ndarray, which: str = "laplacian") -> float:
        """x·M·x for M in {laplacian, degree, adjacency}"""
        matrix = {"laplacian": self.laplacian, "degree": self.degree_matrix, "adjacency": self.adjacency}.get(which)
        if matrix is None:
            raise ParameterError(f"unknown matrix '{which}'")
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.size,):
            raise ParameterError(f"vector of length {x.shape} does not match cluster size {self.size}")
        return float(x @ (matrix @ x))

    def edge_form(self, x: np.ndarray) -> float:
        """½ Σ_jk T^c_jk (x_j - x_k)²"""
        coo = self.adjacency.tocoo()
        x = np.asarray(x, dtype=np.float64)
        return 0.5 * float(np.sum(coo.data * (x[coo.row] - x[coo.col]) ** 2))

    def row_sum_residual(self) -> float:
        return float(np.abs(np.asarray(self.laplacian.sum(axis=1))).max(initial=0.0))


def quadratic_form_residual(laplacian: SubgraphLaplacian, x: np.ndarray) -> float:
    """|x·L·x - ½ Σ T_jk (x_j - x_k)²|, which vanishes for every x"""
    return abs(laplacian.quadratic(x) - laplacian.edge_form(x))


def _side_vectors(prop: BipartitionProposal, members: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Boolean mask of side a over `members`, and the split f-vector"""
    in_a = np.isin(members, np.asarray(prop.side_a, dtype=np.int64))
    n_a, n_b = prop.n_a, prop.n_b
    n_c = n_a + n_b
    f = np.where(in_a, math.sqrt(n_b / (n_c * n_a)), -math.sqrt(n_a / (n_c * n_b)))
    return in_a, f


def _checked(g: Graph, p: Partition, prop: BipartitionProposal) -> None:
    p.validate_for(g)
    prop.validate_for(p)


def _internal_weights(laplacian: SubgraphLaplacian, in_a: np.ndarray) -> Tuple[float, float, float]:
    """(I_a, I_b, W_ab): internal weights of both sides (both orientations) and the unordered cross weight"""
    coo = laplacian.adjacency.tocoo()
    side_r, side_c = in_a[coo.row], in_a[coo.col]
    internal_a = float(coo.data[side_r & side_c].sum())
    internal_b = float(coo.data[~side_r & ~side_c].sum())
    cross = float(coo.data[side_r & ~side_c].sum())
    return internal_a, internal_b, cross


def _split_terms(g: Graph, p: Partition, prop: BipartitionProposal) -> Tuple[float, float]:
    """(ΔI_c, W_ab)"""
    laplacian = SubgraphLaplacian.of_cluster(g, p, prop.cluster)
    in_a, _ = _side_vectors(prop, laplacian.members)
    internal_a, internal_b, cross = _internal_weights(laplacian, in_a)
    n_c = prop.n_a + prop.n_b
    delta_i = internal_a / prop.n_a + internal_b / prop.n_b - (internal_a + internal_b + 2.0 * cross) / n_c
    return delta_i, cross


def delta_i_direct(g: Graph, p: Partition, prop: BipartitionProposal) -> float:
    """ΔI_c = I_a/n_a + I_b/n_b - I_c/n_c from edge weights"""
    _checked(g, p, prop)
    return _split_terms(g, p, prop)[0]


def _external_change(g: Graph, p: Partition, prop: BipartitionProposal) -> float:
    """Change of the separation terms between c and every other cluster, from
    the edges leaving c only"""
    members = p.members(prop.cluster)
    rows = g.adjacency[members].tocoo()
    targets = rows.col
    outside = p.assignment[targets] != prop.cluster
    if not outside.any():
        return 0.0
    in_a = np.isin(members[rows.row[outside]], np.asarray(prop.side_a, dtype=np.int64))
    weights = rows.data[outside]
    other = np.sqrt(p.sizes[p.assignment[targets[outside]]].astype(np.float64))
    n_c = prop.n_a + prop.n_b
    side_sizes = np.where(in_a, prop.n_a, prop.n_b).astype(np.float64)
    before = 2.0 * np.sum(weights / (math.sqrt(n_c) * other))
    after = 2.0 * np.sum(weights / (np.sqrt(side_sizes) * other))
    return float(before - after)


def delta_m_direct(g: Graph, p: Partition, prop: BipartitionProposal, method: str = "incremental") -> float:
    """M(split) - M(p).

    "incremental" touches only the edges incident to the split cluster;
    "full" evaluates the metric on both partitions.
    """
    _checked(g, p, prop)
    if method == "full":
        return modularity_density_value(g, prop.apply(p)) - modularity_density_value(g, p)
    if method != "incremental":
        raise ParameterError(f"unknown method '{method}'")

    delta_i, cross = _split_terms(g, p, prop)
    return delta_i - 2.0 * cross / math.sqrt(prop.n_a * prop.n_b) + _external_change(g, p, prop)


def _delta_n(prop: BipartitionProposal, in_a: np.ndarray) -> np.ndarray:
    n_c = prop.n_a + prop.n_b
    base = 1.0 / math.sqrt(n_c)
    return np.where(in_a, 1.0 / math.sqrt(prop.n_a) - base, 1.0 / math.sqrt(prop.n_b) - base)


def _beta(g: Graph, p: Partition, members: np.ndarray, delta_n: np.ndarray) -> float:
    """2 (N - n̂_c)·T·δN over the edges leaving c"""
    external = p.aggregate_vector().copy()
    external[members] = 0.0
    return 2.0 * float(delta_n @ (g.adjacency[members] @ external))


def delta_m_decomposed(g: Graph, p: Partition, prop: BipartitionProposal) -> BipartitionEval:
    """δM = f·D^c·f·[1 - λ] - β with every intermediate quantity exposed"""
    _checked(g, p, prop)
    n_a, n_b = prop.n_a, prop.n_b
    n_c = n_a + n_b
    laplacian = SubgraphLaplacian.of_cluster(g, p, prop.cluster)
    members = laplacian.members
    in_a, f = _side_vectors(prop, members)

    fDf = laplacian.quadratic(f, "degree")
    fLf = laplacian.quadratic(f, "laplacian")
    delta_i = fDf - fLf
    delta_n = _delta_n(prop, in_a)
    beta = _beta(g, p, members, delta_n)
    coupling = 1.0 + 2.0 * math.sqrt(n_a * n_b) / n_c
    alpha = fDf - coupling * fLf

    degenerate = fDf <= 0.0
    if degenerate:
        logger.info("Cluster %d has no internal edges; λ is undefined, δM taken from the direct path", prop.cluster)
        lambda_ = None
        delta_m = delta_m_direct(g, p, prop)
    else:
        lambda_ = coupling * fLf / fDf
        delta_m = fDf * (1.0 - lambda_) - beta

    return BipartitionEval(
        cluster=prop.cluster,
        n_a=n_a,
        n_b=n_b,
        delta_m=delta_m,
        delta_I_c=delta_i,
        alpha=alpha,
        beta=beta,
        lambda_=lambda_,
        fDf=fDf,
        fLf=fLf,
        f={int(node): float(value) for node, value in zip(members, f)},
        delta_N={int(node): float(value) for node, value in zip(members, delta_n)},
        degenerate=degenerate,
        node_labels=[str(label) for label in g.labels],
    )


def laplacian_identity_check(g: Graph, p: Partition, prop: BipartitionProposal) -> float:
    """|n̂_a·T·n̂_b + n̂_b·T·n̂_a - (2√(n_a n_b)/n_c)·f·L^c·f|"""
    _checked(g, p, prop)
    n_a, n_b = prop.n_a, prop.n_b
    n_c = n_a + n_b
    laplacian = SubgraphLaplacian.of_cluster(g, p, prop.cluster)
    in_a, f = _side_vectors(prop, laplacian.members)
    _, _, cross = _internal_weights(laplacian, in_a)
    lhs = 2.0 * cross / math.sqrt(n_a * n_b)
    rhs = 2.0 * math.sqrt(n_a * n_b) / n_c * laplacian.quadratic(f)
    residual = abs(lhs - rhs)
    if residual > get_settings().tolerance * max(1.0, abs(lhs)):
        logger.warning("Laplacian identity residual %.3e on cluster %d", residual, prop.cluster)
    return residual
