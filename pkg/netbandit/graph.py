"""Attributed citation graphs, cosine similarity and edge spillover weights."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import scipy.sparse as sp
from sklearn.metrics import pairwise
from sklearn.preprocessing import normalize

from .errors import ContractViolation
from .paths import resolve_dataset_dir

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
# One named stream of lines; the name is ``None`` for in-memory sources.
Section = Tuple[Optional[str], Iterable[str]]

# Pairs are scored in chunks to bound the size of the row-gathered matrices.
_PAIR_CHUNK = 50_000


class DatasetFormatError(ValueError):
    """Raised when a ``.content`` or ``.cites`` file cannot be parsed."""

    def __init__(
        self,
        message: str,
        line_number: Optional[int] = None,
        source: Optional[str] = None,
    ) -> None:
        if line_number is not None:
            message = f"line {line_number}: {message}"
        if source is not None:
            message = f"{source}: {message}"
        super().__init__(message)
        self.line_number = line_number
        self.source = source


@dataclass(frozen=True)
class GraphSummary:
    nodes: int
    edges: int
    dimension: int
    dropped_unknown: int = 0
    dropped_self_loops: int = 0
    duplicate_edges: int = 0

    def as_dict(self) -> Dict[str, int]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Undirected graph over integer node indices ``0..n-1``.

    ``node_ids`` maps indices back to the dataset's identifiers, ``attributes``
    holds one binary row per node and every edge of ``network`` carries its
    spillover probability under the ``"p"`` key.
    """

    node_ids: Tuple[str, ...]
    attributes: sp.csr_matrix
    network: nx.Graph
    labels: Tuple[str, ...] = ()
    summary: Optional[GraphSummary] = field(default=None)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return self.network.number_of_edges()

    @property
    def dimension(self) -> int:
        return int(self.attributes.shape[1])

    @property
    def edges(self) -> FrozenSet[Edge]:
        return frozenset((min(u, v), max(u, v)) for u, v in self.network.edges())

    @property
    def edge_weight(self) -> Dict[Edge, float]:
        return {
            (min(u, v), max(u, v)): float(p)
            for u, v, p in self.network.edges(data="p", default=0.0)
        }

    @cached_property
    def adjacency(self) -> Tuple[Tuple[Tuple[int, float], ...], ...]:
        """Per-node ``(neighbor, p)`` tuples in ascending neighbor order."""

        rows: List[Tuple[Tuple[int, float], ...]] = []
        for node in range(self.n_nodes):
            neighbors = sorted(
                (int(other), float(data.get("p", 0.0)))
                for other, data in self.network.adj[node].items()
            )
            rows.append(tuple(neighbors))
        return tuple(rows)

    def neighbors(self, node: int) -> Tuple[Tuple[int, float], ...]:
        return self.adjacency[node]


def _numbered_lines(
    sections: Iterable[Section],
) -> Iterator[Tuple[Optional[str], int, List[str]]]:
    for source, lines in sections:
        for line_number, raw_line in enumerate(lines, start=1):
            tokens = raw_line.split()
            if tokens:
                yield source, line_number, tokens


def _parse_content(sections: Iterable[Section]):
    node_ids: List[str] = []
    labels: List[str] = []
    rows: List[int] = []
    cols: List[int] = []
    seen: Dict[str, int] = {}
    dimension: Optional[int] = None

    for source, line_number, tokens in _numbered_lines(sections):
        if len(tokens) < 3:
            raise DatasetFormatError(
                "expected '<id> <attributes...> <label>'", line_number, source
            )

        node_id, raw_attributes, label = tokens[0], tokens[1:-1], tokens[-1]
        if dimension is None:
            dimension = len(raw_attributes)
        elif len(raw_attributes) != dimension:
            raise DatasetFormatError(
                f"attribute dimension {len(raw_attributes)} differs from {dimension}",
                line_number,
                source,
            )
        if node_id in seen:
            raise DatasetFormatError(
                f"duplicate node id {node_id!r}", line_number, source
            )

        index = len(node_ids)
        for position, token in enumerate(raw_attributes):
            if token == "1":
                rows.append(index)
                cols.append(position)
            elif token != "0":
                raise DatasetFormatError(
                    f"attribute {token!r} is not binary", line_number, source
                )

        seen[node_id] = index
        node_ids.append(node_id)
        labels.append(label)

    if dimension is None:
        raise DatasetFormatError("content source holds no nodes")

    data = np.ones(len(rows), dtype=np.float64)
    attributes = sp.csr_matrix(
        (data, (rows, cols)), shape=(len(node_ids), dimension), dtype=np.float64
    )
    return node_ids, labels, attributes, seen


def load_citation_dataset(
    content_source: Iterable[str], cites_source: Iterable[str]
) -> AttributedGraph:
    """Parse Planetoid-style ``.content`` and ``.cites`` streams.

    Citations are collapsed to undirected edges. Edges that mention unknown
    ids and self-citations are dropped and counted in the graph summary.
    Spillover weights start at zero; see ``compute_spillover_weights``.
    """

    return _load_sections([(None, content_source)], [(None, cites_source)])


def _load_sections(
    content_sections: Sequence[Section], cites_sections: Sequence[Section]
) -> AttributedGraph:
    node_ids, labels, attributes, index_of = _parse_content(content_sections)

    edges = set()
    dropped_unknown = 0
    dropped_self_loops = 0
    duplicates = 0
    for source, line_number, tokens in _numbered_lines(cites_sections):
        if len(tokens) != 2:
            raise DatasetFormatError(
                "expected '<cited_id> <citing_id>'", line_number, source
            )
        cited, citing = tokens
        if cited not in index_of or citing not in index_of:
            dropped_unknown += 1
            continue
        u, v = index_of[cited], index_of[citing]
        if u == v:
            dropped_self_loops += 1
            continue
        edge = (min(u, v), max(u, v))
        if edge in edges:
            duplicates += 1
            continue
        edges.add(edge)

    if dropped_unknown:
        logger.warning("Dropped %d citations referencing unknown ids.", dropped_unknown)
    if dropped_self_loops:
        logger.warning("Dropped %d self-citations.", dropped_self_loops)

    network = nx.Graph()
    network.add_nodes_from(range(len(node_ids)))
    network.add_edges_from(sorted(edges), p=0.0)

    summary = GraphSummary(
        nodes=len(node_ids),
        edges=len(edges),
        dimension=int(attributes.shape[1]),
        dropped_unknown=dropped_unknown,
        dropped_self_loops=dropped_self_loops,
        duplicate_edges=duplicates,
    )
    return AttributedGraph(
        node_ids=tuple(node_ids),
        attributes=attributes,
        network=network,
        labels=tuple(labels),
        summary=summary,
    )


def cosine_similarity(x_i: Sequence[float], x_j: Sequence[float]) -> float:
    """Return the cosine similarity of two vectors, 0 when either is all-zero."""

    left = np.asarray(x_i, dtype=np.float64).reshape(1, -1)
    right = np.asarray(x_j, dtype=np.float64).reshape(1, -1)
    if left.shape != right.shape:
        raise ContractViolation(
            f"dimension mismatch: {left.shape[1]} != {right.shape[1]}"
        )
    # Rounding can push identical rows a hair past 1.
    return min(float(pairwise.cosine_similarity(left, right)[0, 0]), 1.0)


def pairwise_cosine(
    attributes: sp.csr_matrix, left: np.ndarray, right: np.ndarray
) -> np.ndarray:
    """Vectorised ``cosine_similarity`` for index pairs ``(left[k], right[k])``."""

    left = np.asarray(left, dtype=np.int64)
    right = np.asarray(right, dtype=np.int64)
    unit_rows = normalize(sp.csr_matrix(attributes), norm="l2", axis=1)
    result = np.zeros(left.shape[0], dtype=np.float64)

    for start in range(0, left.shape[0], _PAIR_CHUNK):
        stop = start + _PAIR_CHUNK
        lhs, rhs = left[start:stop], right[start:stop]
        result[start:stop] = np.asarray(
            unit_rows[lhs].multiply(unit_rows[rhs]).sum(axis=1)
        ).ravel()

    return np.clip(result, 0.0, 1.0)


def compute_spillover_weights(graph: AttributedGraph) -> AttributedGraph:
    """Return a copy of ``graph`` whose edge ``p`` is the endpoints' cosine similarity."""

    edges = sorted(graph.edges)
    network = graph.network.copy()
    if edges:
        left, right = (np.fromiter(side, dtype=np.int64) for side in zip(*edges))
        weights = pairwise_cosine(graph.attributes, left, right)
        nx.set_edge_attributes(
            network,
            {edge: float(weight) for edge, weight in zip(edges, weights)},
            "p",
        )
    return replace(graph, network=network)


def _dataset_files(directory: Path) -> List[Tuple[Path, Path]]:
    pairs: List[Tuple[Path, Path]] = []
    for content_path in sorted(directory.glob("*.content")):
        cites_path = content_path.with_suffix(".cites")
        if not cites_path.exists():
            raise FileNotFoundError(f"{cites_path} is missing for {content_path.name}")
        pairs.append((content_path, cites_path))
    if not pairs:
        raise FileNotFoundError(f"No *.content files found in {directory}")
    return pairs


def dataset_files(dataset: str) -> List[Tuple[Path, Path]]:
    """Return the ``(content, cites)`` file pairs that make up ``dataset``."""

    directory = resolve_dataset_dir(dataset)
    if not directory.is_dir():
        raise FileNotFoundError(f"Dataset directory {directory} does not exist")
    return _dataset_files(directory)


def _decoded_lines(path: Path) -> Iterator[str]:
    with path.open("rb") as handle:
        for line_number, raw_line in enumerate(handle, start=1):
            try:
                yield raw_line.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise DatasetFormatError(
                    f"not valid UTF-8 ({exc.reason})", line_number, str(path)
                ) from exc


def load_dataset(dataset: str) -> AttributedGraph:
    """Load every content/cites pair of ``dataset`` as one weighted graph.

    Multi-part datasets such as WebKB are concatenated into a single graph of
    disjoint sub-networks. Parse errors name the offending file and line.
    """

    pairs = dataset_files(dataset)
    graph = _load_sections(
        [(str(path), _decoded_lines(path)) for path, _ in pairs],
        [(str(path), _decoded_lines(path)) for _, path in pairs],
    )

    graph = compute_spillover_weights(graph)
    logger.info(
        "Loaded %s: %d nodes, %d edges, %d attributes.",
        dataset,
        graph.n_nodes,
        graph.n_edges,
        graph.dimension,
    )
    return graph
