"""
Seeded constructors for the synthetic network families, with ground-truth
partitions attached
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse.csgraph import connected_components
import scipy.sparse as sp

from src.config import get_settings
from src.errors import GeneratorError, ParameterError
from src.graph import Graph, Partition
from src.models import Family, GeneratorMetadata, GeneratorSpec

logger = logging.getLogger(__name__)

PRNG_NAME = "numpy.PCG64+SeedSequence"

SeedLike = Union[int, np.random.SeedSequence]


@dataclass(frozen=True)
class LabeledGraph:
    """A generated graph with its natural communities"""
    graph: Graph
    truth: Partition
    spec: Optional[GeneratorSpec] = None

    def metadata(self) -> GeneratorMetadata:
        return GeneratorMetadata(
            spec=self.spec,
            prng=PRNG_NAME,
            node_count=self.graph.node_count,
            edge_count=self.graph.edge_count,
        )


def _seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def _rng(seed: SeedLike) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(_seed_sequence(seed)))


def _check_probability(m: int, p: float) -> None:
    if m < 3:
        raise ParameterError(f"community size must be >= 3, got {m}")
    p_min = 2.0 / (m - 1)
    if p < p_min - 1e-12 or p > 1.0:
        raise ParameterError(f"p={p} outside [{p_min}, 1] for m={m}")


def _er_edges(m: int, p: float, seed: SeedLike, max_retries: int) -> Tuple[np.ndarray, np.ndarray]:
    """Connected G(m, p) edge arrays by rejection sampling"""
    _check_probability(m, p)
    rows, cols = np.triu_indices(m, k=1)
    rng = _rng(seed)
    for attempt in range(1, max_retries + 1):
        keep = rng.random(rows.shape[0]) < p
        src, dst = rows[keep], cols[keep]
        if src.shape[0] >= m - 1:
            adjacency = sp.coo_matrix((np.ones(src.shape[0]), (src, dst)), shape=(m, m))
            components, _ = connected_components(adjacency, directed=False)
            if components == 1:
                if attempt > 1:
                    logger.debug("G(%d, %.4f) connected after %d attempts", m, p, attempt)
                return src, dst
    raise GeneratorError(f"no connected G({m}, {p}) sample within {max_retries} attempts")


def gen_er(m: int, p: float, seed: SeedLike, max_retries: Optional[int] = None) -> Graph:
    """Connected Erdős–Rényi graph with unit weights"""
    retries = max_retries if max_retries is not None else get_settings().generator_max_retries
    src, dst = _er_edges(m, p, seed, retries)
    return Graph(m, src, dst)


class _Assembler:
    """Concatenates communities into one graph with node offsets"""

    def __init__(self):
        self.sources: List[np.ndarray] = []
        self.targets: List[np.ndarray] = []
        self.offsets: List[int] = []
        self.node_count = 0

    def add_community(self, m: int, src: np.ndarray, dst: np.ndarray) -> None:
        self.offsets.append(self.node_count)
        self.sources.append(src + self.node_count)
        self.targets.append(dst + self.node_count)
        self.node_count += m

    def add_edges(self, src: Sequence[int], dst: Sequence[int]) -> None:
        self.sources.append(np.asarray(src, dtype=np.int64))
        self.targets.append(np.asarray(dst, dtype=np.int64))

    def build(self, sizes: Sequence[int], spec: Optional[GeneratorSpec]) -> LabeledGraph:
        graph = Graph(self.node_count, np.concatenate(self.sources), np.concatenate(self.targets))
        truth = Partition(np.repeat(np.arange(len(sizes)), sizes))
        return LabeledGraph(graph=graph, truth=truth, spec=spec)


def _communities(
    sizes: Sequence[int], probs: Sequence[float], seed: SeedLike, max_retries: Optional[int]
) -> Tuple[_Assembler, np.random.Generator]:
    """Independent ER communities plus a generator reserved for bridge draws"""
    if len(sizes) != len(probs):
        raise ParameterError("sizes and probs must have the same length")
    retries = max_retries if max_retries is not None else get_settings().generator_max_retries
    children = _seed_sequence(seed).spawn(len(sizes) + 1)
    assembler = _Assembler()
    for m, p, child in zip(sizes, probs, children[:-1]):
        src, dst = _er_edges(m, p, child, retries)
        assembler.add_community(m, src, dst)
    return assembler, _rng(children[-1])


def _bridge(assembler: _Assembler, sizes: Sequence[int], first: int, second: int, rng: np.random.Generator) -> None:
    u = assembler.offsets[first] + int(rng.integers(sizes[first]))
    v = assembler.offsets[second] + int(rng.integers(sizes[second]))
    assembler.add_edges([u], [v])


def gen_two_communities(
    m: int,
    n: int,
    p_m: float,
    p_n: float,
    seed: SeedLike,
    max_retries: Optional[int] = None,
    spec: Optional[GeneratorSpec] = None,
) -> LabeledGraph:
    """Two ER communities joined by a single unit bridge between uniform endpoints"""
    assembler, rng = _communities([m, n], [p_m, p_n], seed, max_retries)
    _bridge(assembler, [m, n], 0, 1, rng)
    return assembler.build([m, n], spec)


def gen_ring(
    sizes: Sequence[int],
    probs: Sequence[float],
    seed: SeedLike,
    max_retries: Optional[int] = None,
    spec: Optional[GeneratorSpec] = None,
) -> LabeledGraph:
    """Ring of ER communities; consecutive communities and the last/first pair share one bridge"""
    if len(sizes) < 3:
        raise ParameterError(f"a ring needs at least 3 communities, got {len(sizes)}")
    assembler, rng = _communities(sizes, probs, seed, max_retries)
    count = len(sizes)
    for i in range(count):
        _bridge(assembler, sizes, i, (i + 1) % count, rng)
    return assembler.build(sizes, spec)


def gen_two_cliques_w(m: int, n: int, w: int, seed: SeedLike, spec: Optional[GeneratorSpec] = None) -> LabeledGraph:
    """K_m and K_n plus w distinct unit bridges drawn without replacement from the m*n cross pairs"""
    if m < 3 or n < 3:
        raise ParameterError(f"clique sizes must be >= 3, got m={m}, n={n}")
    if w < 0 or w > m * n:
        raise ParameterError(f"w must lie in 0..{m * n}, got {w}")
    assembler, rng = _communities([m, n], [1.0, 1.0], seed, 1)
    if w > 0:
        picks = np.sort(rng.choice(m * n, size=w, replace=False))
        assembler.add_edges(picks // n, m + picks % n)
    return assembler.build([m, n], spec)


def generate(spec: GeneratorSpec) -> LabeledGraph:
    """Dispatch on the family of a validated spec"""
    probs = list(spec.probs or [1.0] * len(spec.sizes))
    if spec.family == Family.ER_SINGLE:
        graph = gen_er(spec.sizes[0], probs[0], spec.seed)
        return LabeledGraph(graph=graph, truth=Partition.whole(graph.node_count), spec=spec)
    if spec.family == Family.TWO_COMMUNITIES_BRIDGED:
        return gen_two_communities(spec.sizes[0], spec.sizes[1], probs[0], probs[1], spec.seed, spec=spec)
    if spec.family == Family.RING_OF_COMMUNITIES:
        return gen_ring(spec.sizes, probs, spec.seed, spec=spec)
    if spec.family == Family.TWO_CLIQUES_W_BRIDGE:
        return gen_two_cliques_w(spec.sizes[0], spec.sizes[1], spec.bridge_count, spec.seed, spec=spec)
    raise ParameterError(f"unknown family {spec.family}")
