"""Node matching across clusters and greedy cluster pairing."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from sklearn.metrics import pairwise

from .clustering import Clustering
from .errors import ContractViolation
from .graph import AttributedGraph, pairwise_cosine

logger = logging.getLogger(__name__)

ClusterPair = Tuple[int, int]

# Rows of the similarity matrix materialised at once by ``match_nodes``.
_ROW_BLOCK = 256


@dataclass(frozen=True)
class Thresholds:
    gamma: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("gamma", "beta"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ContractViolation(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class ThresholdParams:
    sample_size: int = 200_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sample_size < 1:
            raise ContractViolation("threshold sample size must be positive")


@dataclass(frozen=True, eq=False)
class NodeMatching:
    """Cross-cluster node pairs whose similarity exceeds ``gamma``.

    Stored column-wise: pair ``k`` is ``(left[k], right[k])`` with
    ``left[k] < right[k]``.
    """

    left: np.ndarray
    right: np.ndarray
    similarity: np.ndarray
    gamma: float

    def __len__(self) -> int:
        return int(self.left.shape[0])

    @property
    def pairs(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset(zip(self.left.tolist(), self.right.tolist()))


@dataclass(frozen=True)
class ClusterMatchMap:
    match: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for cluster, mate in self.match.items():
            if cluster == mate:
                raise ContractViolation(f"cluster {cluster} matched to itself")
            if self.match.get(mate) != cluster:
                raise ContractViolation(
                    f"match map is not involutive at {cluster} -> {mate}"
                )

    @classmethod
    def from_pairs(cls, pairs: Iterable[ClusterPair]) -> "ClusterMatchMap":
        match: Dict[int, int] = {}
        for first, second in pairs:
            match[first] = second
            match[second] = first
        return cls(match=match)

    def mate(self, cluster: int) -> Optional[int]:
        return self.match.get(cluster)

    def pairs(self) -> Tuple[ClusterPair, ...]:
        return tuple(sorted((c, m) for c, m in self.match.items() if c < m))

    def __len__(self) -> int:
        return len(self.match) // 2


@dataclass(frozen=True, eq=False)
class CMatchResult:
    thresholds: Thresholds
    node_matching: NodeMatching
    weights: Dict[ClusterPair, float]
    match_map: ClusterMatchMap
    metadata: Dict[str, object]


def compute_threshold(similarity_sample: Sequence[float]) -> float:
    """Return the second quartile of ``similarity_sample``."""

    values = np.asarray(similarity_sample, dtype=np.float64)
    if values.size == 0:
        raise ContractViolation("cannot take the median of an empty sample")
    return float(np.median(values))


def _cross_cluster_pair_count(clustering: Clustering) -> int:
    n_nodes = len(clustering.assignment)
    within = sum(len(members) * (len(members) - 1) // 2 for members in clustering.clusters)
    return n_nodes * (n_nodes - 1) // 2 - within


def sample_cross_cluster_pairs(
    clustering: Clustering, sample_size: int, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw up to ``sample_size`` distinct cross-cluster pairs, uniformly.

    When the graph has no more cross-cluster pairs than requested, all of them
    are returned in lexicographic order.
    """

    labels = clustering.labels
    n_nodes = labels.shape[0]
    total = _cross_cluster_pair_count(clustering)

    if total <= sample_size:
        left, right = np.triu_indices(n_nodes, k=1)
        keep = labels[left] != labels[right]
        return left[keep].astype(np.int64), right[keep].astype(np.int64)

    rng = np.random.default_rng(seed)
    codes = np.empty(0, dtype=np.int64)
    while codes.shape[0] < sample_size:
        draws = rng.integers(0, n_nodes, size=(2, 2 * sample_size), dtype=np.int64)
        lo, hi = np.minimum(draws[0], draws[1]), np.maximum(draws[0], draws[1])
        valid = (lo != hi) & (labels[lo] != labels[hi])
        codes = np.concatenate([codes, lo[valid] * n_nodes + hi[valid]])
        # Keep first occurrences in draw order.
        _, first = np.unique(codes, return_index=True)
        codes = codes[np.sort(first)]

    codes = codes[:sample_size]
    return codes // n_nodes, codes % n_nodes


def match_nodes(
    graph: AttributedGraph, clustering: Clustering, gamma: float
) -> NodeMatching:
    """Return every cross-cluster node pair with similarity strictly above ``gamma``."""

    attributes = sp.csr_matrix(graph.attributes)
    labels = clustering.labels
    n_nodes = graph.n_nodes

    lefts, rights, sims = [], [], []
    for start in range(0, n_nodes, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, n_nodes)
        similarity = np.clip(
            pairwise.cosine_similarity(attributes[start:stop], attributes), 0.0, 1.0
        )

        rows = np.arange(start, stop)[:, None]
        cols = np.arange(n_nodes)[None, :]
        mask = (cols > rows) & (labels[start:stop, None] != labels[None, :])
        mask &= similarity > gamma

        block_rows, block_cols = np.nonzero(mask)
        lefts.append(block_rows + start)
        rights.append(block_cols)
        sims.append(similarity[block_rows, block_cols])

    return NodeMatching(
        left=np.concatenate(lefts).astype(np.int64),
        right=np.concatenate(rights).astype(np.int64),
        similarity=np.concatenate(sims).astype(np.float64),
        gamma=float(gamma),
    )


def cluster_similarity(
    c_i: int, c_j: int, matching: NodeMatching, clustering: Clustering
) -> float:
    """Mean similarity of matched node pairs spanning clusters ``c_i`` and ``c_j``."""

    if c_i == c_j:
        raise ContractViolation("cluster similarity needs two distinct clusters")
    labels = clustering.labels
    left, right = labels[matching.left], labels[matching.right]
    spanning = ((left == c_i) & (right == c_j)) | ((left == c_j) & (right == c_i))
    if not spanning.any():
        return 0.0
    return float(matching.similarity[spanning].mean())


def cluster_similarity_weights(
    matching: NodeMatching, clustering: Clustering
) -> Dict[ClusterPair, float]:
    """``cluster_similarity`` for every cluster pair that has matched nodes."""

    if not len(matching):
        return {}
    labels = clustering.labels
    n_clusters = clustering.n_clusters
    first = np.minimum(labels[matching.left], labels[matching.right])
    second = np.maximum(labels[matching.left], labels[matching.right])
    codes, inverse = np.unique(first * n_clusters + second, return_inverse=True)
    totals = np.bincount(inverse, weights=matching.similarity)
    counts = np.bincount(inverse)
    return {
        (int(code // n_clusters), int(code % n_clusters)): float(total / count)
        for code, total, count in zip(codes, totals, counts)
    }


def match_clusters(
    clustering: Clustering, weights: Mapping[ClusterPair, float], beta: float
) -> ClusterMatchMap:
    """Greedy one-to-one matching of cluster pairs whose weight exceeds ``beta``.

    Candidates are taken by descending weight, ties by cluster-id pair.
    """

    n_clusters = clustering.n_clusters
    candidates = []
    for (first, second), weight in weights.items():
        if first == second or weight <= beta:
            continue
        if not (0 <= first < n_clusters and 0 <= second < n_clusters):
            raise ContractViolation(f"unknown cluster in pair ({first}, {second})")
        pair = (min(first, second), max(first, second))
        candidates.append((-weight, pair))

    matched: set = set()
    pairs = []
    for _, (first, second) in sorted(candidates):
        if first in matched or second in matched:
            continue
        matched.update((first, second))
        pairs.append((first, second))
    return ClusterMatchMap.from_pairs(pairs)


def build_cmatch(
    graph: AttributedGraph,
    clustering: Clustering,
    params: ThresholdParams = ThresholdParams(),
) -> CMatchResult:
    """Choose both thresholds, match nodes, then pair clusters."""

    left, right = sample_cross_cluster_pairs(clustering, params.sample_size, params.seed)
    if left.size == 0:
        logger.warning("Graph has no cross-cluster pairs; nothing to match.")
        gamma = 1.0
    else:
        gamma = compute_threshold(pairwise_cosine(graph.attributes, left, right))

    matching = match_nodes(graph, clustering, gamma)
    weights = cluster_similarity_weights(matching, clustering)
    nonzero = [weight for weight in weights.values() if weight > 0]
    if nonzero:
        beta = compute_threshold(nonzero)
    else:
        logger.warning("No matched node pairs across clusters; clusters stay unmatched.")
        beta = 1.0

    match_map = match_clusters(clustering, weights, beta)
    thresholds = Thresholds(gamma=gamma, beta=beta)
    metadata: Dict[str, object] = {
        "gamma": gamma,
        "beta": beta,
        "gamma_population": "cross-cluster node pairs",
        "beta_population": "nonzero cluster similarities",
        "sample_size": params.sample_size,
        "sampled_pairs": int(left.size),
        "cross_cluster_pairs": _cross_cluster_pair_count(clustering),
        "sample_seed": params.seed,
        "matched_node_pairs": len(matching),
        "candidate_cluster_pairs": len(weights),
        "matched_cluster_pairs": len(match_map),
    }
    logger.info(
        "CMatch thresholds gamma=%.4f beta=%.4f; %d of %d clusters matched.",
        gamma,
        beta,
        2 * len(match_map),
        clustering.n_clusters,
    )
    return CMatchResult(
        thresholds=thresholds,
        node_matching=matching,
        weights=weights,
        match_map=match_map,
        metadata=metadata,
    )
