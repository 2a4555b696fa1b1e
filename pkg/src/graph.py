"""
Graph and partition representations with the cluster-indicator algebra
"""
import logging
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order

from src.errors import GraphError, PartitionError

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class Graph:
    """Undirected, non-negatively weighted simple graph on dense node ids 0..n-1.

    Each undirected edge is stored once, in the orientation it was given. The
    symmetric adjacency tensor T is kept as a CSR matrix so neighbor scans cost
    O(degree). Instances are immutable.
    """

    def __init__(
        self,
        node_count: int,
        sources: Sequence[int],
        targets: Sequence[int],
        weights: Optional[Sequence[float]] = None,
        labels: Optional[Sequence[Any]] = None,
    ):
        if node_count < 1:
            raise GraphError(f"node_count must be positive, got {node_count}")

        src = np.asarray(sources, dtype=np.int64).reshape(-1)
        dst = np.asarray(targets, dtype=np.int64).reshape(-1)
        if src.shape != dst.shape:
            raise GraphError("sources and targets differ in length")
        if weights is None:
            w = np.ones(src.shape[0], dtype=np.float64)
        else:
            w = np.asarray(weights, dtype=np.float64).reshape(-1)
            if w.shape != src.shape:
                raise GraphError("weights and edges differ in length")

        self._validate(node_count, src, dst, w)

        self._node_count = int(node_count)
        self._sources = _frozen(src.copy())
        self._targets = _frozen(dst.copy())
        self._weights = _frozen(w.copy())
        self._total_weight = float(w.sum())

        if labels is None:
            self._labels: List[Any] = list(range(node_count))
        else:
            if len(labels) != node_count:
                raise GraphError("labels must name every node")
            self._labels = list(labels)

        rows = np.concatenate([src, dst])
        cols = np.concatenate([dst, src])
        data = np.concatenate([w, w])
        adjacency = sp.csr_matrix((data, (rows, cols)), shape=(node_count, node_count))
        adjacency.sort_indices()
        self._adjacency = adjacency
        self._degrees = _frozen(np.asarray(adjacency.sum(axis=1)).reshape(-1))

    @staticmethod
    def _validate(node_count: int, src: np.ndarray, dst: np.ndarray, w: np.ndarray) -> None:
        if src.size == 0:
            return
        out_of_range = (src < 0) | (src >= node_count) | (dst < 0) | (dst >= node_count)
        if out_of_range.any():
            i = int(np.argmax(out_of_range))
            raise GraphError(f"edge {i} ({src[i]}, {dst[i]}) references a node outside 0..{node_count - 1}")
        loops = src == dst
        if loops.any():
            i = int(np.argmax(loops))
            raise GraphError(f"edge {i} is a self-loop on node {src[i]}")
        bad = ~np.isfinite(w) | (w < 0)
        if bad.any():
            i = int(np.argmax(bad))
            raise GraphError(f"edge {i} has invalid weight {w[i]}")
        keys = np.minimum(src, dst) * node_count + np.maximum(src, dst)
        unique, counts = np.unique(keys, return_counts=True)
        if (counts > 1).any():
            key = int(unique[np.argmax(counts > 1)])
            raise GraphError(f"duplicate edge ({key // node_count}, {key % node_count})")

    @classmethod
    def from_edges(
        cls,
        edges: Sequence[Tuple],
        node_count: Optional[int] = None,
        labels: Optional[Sequence[Any]] = None,
    ) -> "Graph":
        """Build from (u, v) or (u, v, w) tuples; node_count defaults to max id + 1"""
        sources, targets, weights = [], [], []
        for edge in edges:
            sources.append(edge[0])
            targets.append(edge[1])
            weights.append(edge[2] if len(edge) > 2 else 1.0)
        if node_count is None:
            node_count = max(max(sources, default=-1), max(targets, default=-1)) + 1
        return cls(node_count, sources, targets, weights, labels=labels)

    @property
    def node_count(self) -> int:
        return self._node_count

    @property
    def edge_count(self) -> int:
        return int(self._sources.shape[0])

    @property
    def total_weight(self) -> float:
        return self._total_weight

    @property
    def sources(self) -> np.ndarray:
        return self._sources

    @property
    def targets(self) -> np.ndarray:
        return self._targets

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric tensor T (treat as read-only)"""
        return self._adjacency

    @property
    def degrees(self) -> np.ndarray:
        """Weighted degree of every node"""
        return self._degrees

    @property
    def labels(self) -> List[Any]:
        """Original node labels, indexed by dense id"""
        return list(self._labels)

    def label_mapping(self) -> Dict[str, int]:
        return {str(label): i for i, label in enumerate(self._labels)}

    def neighbors(self, node: int) -> Tuple[np.ndarray, np.ndarray]:
        """(neighbor ids, weights) of one node"""
        start, stop = self._adjacency.indptr[node], self._adjacency.indptr[node + 1]
        return self._adjacency.indices[start:stop], self._adjacency.data[start:stop]

    def edges(self) -> Iterator[Tuple[int, int, float]]:
        for u, v, w in zip(self._sources, self._targets, self._weights):
            yield int(u), int(v), float(w)

    def induced_adjacency(self, members: np.ndarray) -> sp.csr_matrix:
        """T^c: adjacency restricted to `members` (rows/cols in the given order)"""
        return self._adjacency[members][:, members].tocsr()

    def __repr__(self) -> str:
        return f"Graph(nodes={self.node_count}, edges={self.edge_count}, total_weight={self.total_weight:g})"


def is_connected(g: Graph) -> bool:
    """Breadth-first reachability from node 0 covers every node"""
    if g.node_count == 1:
        return True
    reached = breadth_first_order(g.adjacency, 0, directed=False, return_predecessors=False)
    return int(reached.shape[0]) == g.node_count


class Partition:
    """Non-overlapping assignment of every node to exactly one non-empty cluster.

    Cluster ids are dense 0..k-1 in order of first appearance, so the
    assignment array is the restricted growth string of the partition. The
    labels the caller supplied are kept for reporting.
    """

    def __init__(self, assignment: Sequence[Any]):
        raw = np.asarray(list(assignment) if not isinstance(assignment, np.ndarray) else assignment)
        if raw.ndim != 1 or raw.shape[0] == 0:
            raise PartitionError("assignment must be a non-empty 1-D sequence")

        uniques, first_seen, inverse = np.unique(raw, return_index=True, return_inverse=True)
        order = np.argsort(first_seen, kind="stable")
        rank = np.empty(order.shape[0], dtype=np.int64)
        rank[order] = np.arange(order.shape[0])

        self._assignment = _frozen(rank[inverse.reshape(-1)].astype(np.int64))
        self._labels = [uniques[i].item() if hasattr(uniques[i], "item") else uniques[i] for i in order]
        self._sizes = _frozen(np.bincount(self._assignment).astype(np.int64))
        self._members: Optional[List[np.ndarray]] = None

    @classmethod
    def from_clusters(cls, clusters: Sequence[Sequence[int]], node_count: Optional[int] = None) -> "Partition":
        """Build from explicit node groups; every node must appear exactly once"""
        if node_count is None:
            node_count = sum(len(c) for c in clusters)
        assignment = np.full(node_count, -1, dtype=np.int64)
        for cid, nodes in enumerate(clusters):
            for node in nodes:
                if node < 0 or node >= node_count:
                    raise PartitionError(f"node {node} outside 0..{node_count - 1}")
                if assignment[node] != -1:
                    raise PartitionError(f"node {node} assigned twice")
                assignment[node] = cid
        if (assignment < 0).any():
            missing = int(np.argmax(assignment < 0))
            raise PartitionError(f"node {missing} has no cluster")
        return cls(assignment)

    @classmethod
    def singletons(cls, node_count: int) -> "Partition":
        return cls(np.arange(node_count))

    @classmethod
    def whole(cls, node_count: int) -> "Partition":
        return cls(np.zeros(node_count, dtype=np.int64))

    @property
    def node_count(self) -> int:
        return int(self._assignment.shape[0])

    @property
    def cluster_count(self) -> int:
        return int(self._sizes.shape[0])

    @property
    def assignment(self) -> np.ndarray:
        return self._assignment

    @property
    def sizes(self) -> np.ndarray:
        """n_c per cluster id"""
        return self._sizes

    @property
    def labels(self) -> List[Any]:
        return list(self._labels)

    def label_of(self, cluster: int) -> Any:
        return self._labels[cluster]

    def cluster_of(self, node: int) -> int:
        return int(self._assignment[node])

    def _check_cluster(self, cluster: int) -> None:
        if cluster < 0 or cluster >= self.cluster_count:
            raise PartitionError(f"unknown cluster id {cluster}")

    def members(self, cluster: int) -> np.ndarray:
        """Sorted node ids of one cluster"""
        self._check_cluster(cluster)
        if self._members is None:
            order = np.argsort(self._assignment, kind="stable")
            bounds = np.cumsum(self._sizes)[:-1]
            self._members = [_frozen(chunk) for chunk in np.split(order, bounds)]
        return self._members[cluster]

    def clusters(self) -> List[List[int]]:
        return [self.members(c).tolist() for c in range(self.cluster_count)]

    def unit_vector(self, cluster: int) -> np.ndarray:
        """n̂_c: 1/√n_c on members of c, 0 elsewhere"""
        self._check_cluster(cluster)
        vec = np.zeros(self.node_count)
        vec[self._assignment == cluster] = 1.0 / np.sqrt(self._sizes[cluster])
        return vec

    def aggregate_vector(self) -> np.ndarray:
        """N = Σ_c n̂_c, i.e. 1/√n_{c(i)} at every node"""
        return 1.0 / np.sqrt(self._sizes[self._assignment])

    def indicator_matrix(self) -> sp.csr_matrix:
        """|V| x |C| sparse matrix whose columns are the unit vectors n̂_c"""
        n = self.node_count
        data = 1.0 / np.sqrt(self._sizes[self._assignment])
        return sp.csr_matrix((data, (np.arange(n), self._assignment)), shape=(n, self.cluster_count))

    def split(self, cluster: int, side_a: Sequence[int]) -> "Partition":
        """Partition with `cluster` replaced by side_a and the rest of its members"""
        self._check_cluster(cluster)
        assignment = self._assignment.copy()
        side_b = np.setdiff1d(self.members(cluster), np.asarray(side_a, dtype=np.int64))
        assignment[side_b] = self.cluster_count
        return Partition(assignment)

    def merge(self, first: int, second: int) -> "Partition":
        self._check_cluster(first)
        self._check_cluster(second)
        assignment = self._assignment.copy()
        assignment[assignment == second] = first
        return Partition(assignment)

    def validate_for(self, g: Graph) -> None:
        if self.node_count != g.node_count:
            raise PartitionError(
                f"partition covers {self.node_count} nodes but the graph has {g.node_count}"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self._assignment, other._assignment)

    def __hash__(self) -> int:
        return hash(self._assignment.tobytes())

    def __repr__(self) -> str:
        return f"Partition(nodes={self.node_count}, clusters={self.cluster_count})"


class ClusterStats:
    """Cluster-contracted weights of a (graph, partition) pair.

    `matrix` is the |C| x |C| symmetric matrix with internal_weight(c) on the
    diagonal (both orientations of every internal edge) and
    boundary_weight(c, c') off the diagonal.
    """

    def __init__(self, sizes: np.ndarray, matrix: sp.csr_matrix):
        self.sizes = sizes
        self.matrix = matrix
        self.internal_weight = _frozen(np.asarray(matrix.diagonal(), dtype=np.float64))
        coo = sp.triu(matrix, k=1).tocoo()
        self._pair_rows = _frozen(coo.row.astype(np.int64))
        self._pair_cols = _frozen(coo.col.astype(np.int64))
        self._pair_weights = _frozen(coo.data.astype(np.float64))

    @property
    def cluster_count(self) -> int:
        return int(self.sizes.shape[0])

    def boundary_weight(self, first: int, second: int) -> float:
        if first == second:
            return 0.0
        return float(self.matrix[first, second])

    def boundary_pairs(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Unordered pairs c < c' with nonzero boundary weight"""
        return self._pair_rows, self._pair_cols, self._pair_weights

    def pairs(self) -> Iterator[Tuple[int, int, float]]:
        """Ordered pairs (c, c') with nonzero boundary weight"""
        for a, b, w in zip(self._pair_rows, self._pair_cols, self._pair_weights):
            if w == 0.0:
                continue
            yield int(a), int(b), float(w)
            yield int(b), int(a), float(w)

    @property
    def external_weight(self) -> np.ndarray:
        """Σ_{c' != c} boundary_weight(c, c')"""
        totals = np.asarray(self.matrix.sum(axis=1)).reshape(-1)
        return totals - self.internal_weight

    def conservation_residual(self, total_weight: float) -> float:
        """|Σ internal + Σ_{c != c'} boundary - 2 total_weight|"""
        boundary = 2.0 * float(self._pair_weights.sum())
        return abs(float(self.internal_weight.sum()) + boundary - 2.0 * total_weight)


def cluster_stats(g: Graph, p: Partition) -> ClusterStats:
    """One pass over the edges, aggregated into the cluster-contracted matrix"""
    p.validate_for(g)
    k = p.cluster_count
    cu = p.assignment[g.sources]
    cv = p.assignment[g.targets]
    rows = np.concatenate([cu, cv])
    cols = np.concatenate([cv, cu])
    data = np.concatenate([g.weights, g.weights])
    matrix = sp.coo_matrix((data, (rows, cols)), shape=(k, k)).tocsr()
    return ClusterStats(p.sizes, matrix)
