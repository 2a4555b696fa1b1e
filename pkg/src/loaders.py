"""
Edge-list and partition file I/O
"""
import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from src.errors import GraphFormatError, PartitionError
from src.graph import Graph, Partition

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _content_lines(path: PathLike):
    """Yield (line number, tokens) for every non-blank, non-comment line"""
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"file not found: {file_path}")
    with open(file_path, "r", encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield number, line.split()


def load_graph(path: PathLike) -> Graph:
    """Load a whitespace-separated edge list ("u v" or "u v w", w defaults to 1.0).

    Node labels are compacted to dense ids in order of first appearance; the
    original labels stay available as `Graph.labels`.
    """
    ids: Dict[str, int] = {}
    seen: Dict[Tuple[int, int], int] = {}
    sources: List[int] = []
    targets: List[int] = []
    weights: List[float] = []

    for number, tokens in _content_lines(path):
        if len(tokens) not in (2, 3):
            raise GraphFormatError(f"expected 'u v' or 'u v w', got {len(tokens)} fields", str(path), number)
        u_label, v_label = tokens[0], tokens[1]
        weight = 1.0
        if len(tokens) == 3:
            try:
                weight = float(tokens[2])
            except ValueError:
                raise GraphFormatError(f"weight '{tokens[2]}' is not a number", str(path), number) from None
            if not np.isfinite(weight):
                raise GraphFormatError(f"weight '{tokens[2]}' is not finite", str(path), number)
            if weight < 0:
                raise GraphFormatError(f"negative weight {weight}", str(path), number)
        if u_label == v_label:
            raise GraphFormatError(f"self-loop on node {u_label}", str(path), number)

        u = ids.setdefault(u_label, len(ids))
        v = ids.setdefault(v_label, len(ids))
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(
                f"duplicate edge {u_label}-{v_label} (first seen on line {seen[key]})", str(path), number
            )
        seen[key] = number
        sources.append(u)
        targets.append(v)
        weights.append(weight)

    if not ids:
        raise GraphFormatError("no edges found", str(path))

    labels = list(ids.keys())
    graph = Graph(len(labels), sources, targets, weights, labels=labels)
    logger.debug("Loaded %s from %s", graph, path)
    return graph


def save_graph(g: Graph, path: PathLike) -> None:
    """Write "u v w" lines using the original labels; load_graph reads it back identically"""
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    labels = g.labels
    with open(file_path, "w", encoding="utf-8") as handle:
        for u, v, w in g.edges():
            handle.write(f"{labels[u]} {labels[v]} {w!r}\n")


def load_partition(path: PathLike, g: Graph) -> Partition:
    """Load "node cluster-id" lines; every graph node must appear exactly once"""
    mapping = g.label_mapping()
    assignment: List[str] = [None] * g.node_count  # type: ignore[list-item]
    for number, tokens in _content_lines(path):
        if len(tokens) != 2:
            raise GraphFormatError(f"expected 'node cluster-id', got {len(tokens)} fields", str(path), number)
        node_label, cluster_label = tokens
        if node_label not in mapping:
            raise GraphFormatError(f"node {node_label} is not in the graph", str(path), number)
        node = mapping[node_label]
        if assignment[node] is not None:
            raise GraphFormatError(f"node {node_label} assigned twice", str(path), number)
        assignment[node] = cluster_label

    missing = [g.labels[i] for i, c in enumerate(assignment) if c is None]
    if missing:
        raise PartitionError(f"{path}: {len(missing)} node(s) without a cluster, e.g. {missing[:5]}")

    if all(_is_canonical_int(c) for c in assignment):
        return Partition([int(c) for c in assignment])
    return Partition(assignment)


def save_partition(p: Partition, g: Graph, path: PathLike) -> None:
    """Write one "node cluster-id" line per node"""
    p.validate_for(g)
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    labels = g.labels
    with open(file_path, "w", encoding="utf-8") as handle:
        for node in range(g.node_count):
            handle.write(f"{labels[node]} {p.label_of(p.cluster_of(node))}\n")


def _is_canonical_int(token: str) -> bool:
    """True only when int() maps the token back to itself, so "01" stays a string label"""
    try:
        return str(int(token)) == token
    except ValueError:
        return False


def load_side(path: PathLike, g: Graph) -> List[int]:
    """Node ids listed one label per line (the side a of a bipartition proposal)"""
    mapping = g.label_mapping()
    nodes: List[int] = []
    seen = set()
    for number, tokens in _content_lines(path):
        if len(tokens) != 1:
            raise GraphFormatError(f"expected one node label, got {len(tokens)} fields", str(path), number)
        if tokens[0] not in mapping:
            raise GraphFormatError(f"node {tokens[0]} is not in the graph", str(path), number)
        node = mapping[tokens[0]]
        if node in seen:
            raise GraphFormatError(f"node {tokens[0]} listed twice", str(path), number)
        seen.add(node)
        nodes.append(node)
    if not nodes:
        raise PartitionError(f"{path}: no nodes listed")
    return nodes
