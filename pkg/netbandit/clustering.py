"""Unweighted Markov Clustering (MCL) over sparse matrices."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Tuple

import networkx as nx
import numpy as np
import scipy.sparse as sp

from .errors import ContractViolation
from .graph import AttributedGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MclParams:
    expansion: int = 2
    inflation: float = 2.0
    prune_threshold: float = 1e-5
    max_iterations: int = 100
    convergence_epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if self.expansion < 2:
            raise ContractViolation("MCL expansion must be at least 2")
        if self.inflation <= 1:
            raise ContractViolation("MCL inflation must exceed 1")
        if self.prune_threshold < 0:
            raise ContractViolation("MCL prune threshold must be nonnegative")
        if self.max_iterations < 1:
            raise ContractViolation("MCL needs at least one iteration")
        if self.convergence_epsilon <= 0:
            raise ContractViolation("MCL convergence epsilon must be positive")

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Clustering:
    """Partition of node indices into clusters numbered from 0.

    ``converged`` is false when MCL stopped at ``max_iterations`` and the
    partition was read from the last iterate.
    """

    assignment: Mapping[int, int]
    clusters: Tuple[FrozenSet[int], ...]
    converged: bool = True
    iterations: int = 0

    @classmethod
    def from_labels(
        cls, labels: Iterable[int], *, converged: bool = True, iterations: int = 0
    ) -> "Clustering":
        labels = [int(label) for label in labels]
        members: Dict[int, set] = {}
        for node, label in enumerate(labels):
            members.setdefault(label, set()).add(node)
        clusters = tuple(frozenset(members[label]) for label in sorted(members))
        return cls(
            assignment=dict(enumerate(labels)),
            clusters=clusters,
            converged=converged,
            iterations=iterations,
        )

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @cached_property
    def labels(self) -> np.ndarray:
        labels = np.array(
            [self.assignment[node] for node in range(len(self.assignment))],
            dtype=np.int64,
        )
        labels.setflags(write=False)
        return labels

    def cluster_of(self, node: int) -> int:
        return self.assignment[node]


def _normalize_columns(matrix: sp.csr_array) -> sp.csr_array:
    sums = np.asarray(matrix.sum(axis=0)).ravel()
    inverse = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
    return (matrix @ sp.diags_array(inverse)).tocsr()


def _prune(matrix: sp.csr_array, threshold: float) -> sp.csr_array:
    if threshold > 0:
        matrix.data[matrix.data < threshold] = 0.0
        matrix.eliminate_zeros()
    return _normalize_columns(matrix)


def _attractor_supports(matrix: sp.csr_array) -> List[Tuple[int, ...]]:
    diagonal = matrix.diagonal()
    supports = set()
    for attractor in np.flatnonzero(diagonal > 0):
        start, stop = matrix.indptr[attractor], matrix.indptr[attractor + 1]
        row = matrix.indices[start:stop][matrix.data[start:stop] > 0]
        supports.add(tuple(sorted(int(node) for node in row)))
    return sorted(supports, key=lambda support: (support[0], support))


def _interpret(matrix: sp.csr_array, n_nodes: int) -> np.ndarray:
    claimed = np.full(n_nodes, -1, dtype=np.int64)
    # Overlapping attractor systems: the lowest-numbered cluster keeps the node.
    for cluster_id, support in enumerate(_attractor_supports(matrix)):
        for node in support:
            if claimed[node] == -1:
                claimed[node] = cluster_id

    labels = np.full(n_nodes, -1, dtype=np.int64)
    relabel: Dict[int, int] = {}
    for node in range(n_nodes):
        key = int(claimed[node]) if claimed[node] != -1 else -(node + 1)
        if key not in relabel:
            relabel[key] = len(relabel)
        labels[node] = relabel[key]
    return labels


def mcl_cluster(graph: AttributedGraph, params: MclParams = MclParams()) -> Clustering:
    """Cluster ``graph`` with MCL, ignoring edge weights.

    Clusters are numbered by their smallest member so the result does not
    depend on attractor discovery order.
    """

    n_nodes = graph.n_nodes
    if n_nodes == 0:
        raise ContractViolation("cannot cluster an empty graph")

    adjacency = nx.to_scipy_sparse_array(
        graph.network, nodelist=list(range(n_nodes)), weight=None, format="csr"
    ).astype(np.float64)
    matrix = _normalize_columns(adjacency + sp.eye_array(n_nodes, format="csr"))

    converged = False
    iteration = 0
    for iteration in range(1, params.max_iterations + 1):
        previous = matrix
        expanded = matrix
        for _ in range(params.expansion - 1):
            expanded = expanded @ matrix
        matrix = _prune(
            _normalize_columns(expanded.tocsr().power(params.inflation)),
            params.prune_threshold,
        )
        delta = abs(matrix - previous).max()
        if delta < params.convergence_epsilon:
            converged = True
            break

    if not converged:
        logger.warning(
            "MCL did not converge within %d iterations; using the final iterate.",
            params.max_iterations,
        )

    clustering = Clustering.from_labels(
        _interpret(matrix, n_nodes), converged=converged, iterations=iteration
    )
    logger.info(
        "MCL produced %d clusters after %d iterations.",
        clustering.n_clusters,
        iteration,
    )
    return clustering


def validate_partition(clustering: Clustering, graph: AttributedGraph) -> bool:
    """Return whether ``clustering`` is a total, disjoint cover of the graph's nodes."""

    n_nodes = graph.n_nodes
    if len(clustering.assignment) != n_nodes:
        return False

    covered = set()
    total = 0
    for cluster_id, members in enumerate(clustering.clusters):
        if not members:
            return False
        for node in members:
            if not 0 <= node < n_nodes:
                return False
            if clustering.assignment.get(node) != cluster_id:
                return False
        covered |= members
        total += len(members)

    return total == n_nodes and len(covered) == n_nodes
