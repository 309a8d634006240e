"""Assignment policies: A/B randomisation and UCB bandits at three granularities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, MutableMapping, Optional

import numpy as np

from .arms import UNASSIGNED, Arm
from .clustering import Clustering
from .cmatch import ClusterMatchMap
from .errors import ContractViolation, InvariantViolation
from .graph import AttributedGraph
from .interference import SimulationWorld


class ConfigurationError(ValueError):
    """Raised when a design is missing the structures it needs."""


class DesignKind(str, Enum):
    NODE_AB = "node-ab"
    CLUSTER_AB = "cluster-ab"
    CMATCH_AB = "cmatch-ab"
    NODE_MAB = "node-mab"
    CLUSTER_MAB = "cluster-mab"
    CMATCH_MAB = "cmatch-mab"

    @property
    def is_bandit(self) -> bool:
        return self in _BANDIT_DESIGNS

    @property
    def needs_clustering(self) -> bool:
        return self not in (DesignKind.NODE_AB, DesignKind.NODE_MAB)

    @property
    def needs_match_map(self) -> bool:
        return self in (DesignKind.CMATCH_AB, DesignKind.CMATCH_MAB)

    @property
    def label(self) -> str:
        return _DESIGN_LABELS[self]


_BANDIT_DESIGNS = frozenset(
    {DesignKind.NODE_MAB, DesignKind.CLUSTER_MAB, DesignKind.CMATCH_MAB}
)

_DESIGN_LABELS = {
    DesignKind.NODE_AB: "Node-based A/B",
    DesignKind.CLUSTER_AB: "Cluster-based A/B",
    DesignKind.CMATCH_AB: "CMatch-based A/B",
    DesignKind.NODE_MAB: "Node-based MAB",
    DesignKind.CLUSTER_MAB: "Cluster-based MAB",
    DesignKind.CMATCH_MAB: "CMatch-based MAB",
}

DESIGN_CHOICES = tuple((kind.value, kind.label) for kind in DesignKind)


@dataclass
class BanditState:
    """UCB parameters for the two arms.

    Both arms start with one phantom zero-reward observation
    (``mu_hat = 0``, ``m = 1``).
    """

    alpha: float = 8.0
    mu_hat: List[float] = field(default_factory=lambda: [0.0, 0.0])
    m: List[int] = field(default_factory=lambda: [1, 1])
    t: int = 0
    random_ties: bool = False
    rng: Optional[np.random.Generator] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ContractViolation("alpha must be nonnegative")
        if self.random_ties and self.rng is None:
            raise ContractViolation("random ties need a seeded generator")


def ucb_score(mu_hat: float, m: int, t: int, alpha: float) -> float:
    """Return ``mu_hat + alpha * sqrt(2 ln t / m)``."""

    if m < 1 or t < 1:
        raise ContractViolation("UCB needs m >= 1 and t >= 1")
    return mu_hat + alpha * math.sqrt(2.0 * math.log(t) / m)


def ucb_select(state: BanditState) -> Arm:
    """Arm with the highest UCB score; ties go to Control unless random ties are on."""

    scores = [
        ucb_score(state.mu_hat[arm], state.m[arm], state.t, state.alpha) for arm in Arm
    ]
    if scores[Arm.CONTROL] == scores[Arm.TREATMENT]:
        if state.random_ties:
            return Arm(int(state.rng.integers(0, 2)))
        return Arm.CONTROL
    return Arm.TREATMENT if scores[Arm.TREATMENT] > scores[Arm.CONTROL] else Arm.CONTROL


def ucb_update(state: BanditState, arm: Arm, reward: int) -> BanditState:
    """Fold ``reward`` into the running mean of ``arm``. ``t`` is left alone."""

    state.m[arm] += 1
    count = state.m[arm]
    state.mu_hat[arm] = (reward + (count - 1) * state.mu_hat[arm]) / count
    return state


def _require_structures(
    design: DesignKind,
    clustering: Optional[Clustering],
    match_map: Optional[ClusterMatchMap],
) -> None:
    if design.needs_clustering and clustering is None:
        raise ConfigurationError(f"{design.value} requires a clustering")
    if design.needs_match_map and match_map is None:
        raise ConfigurationError(f"{design.value} requires a cluster match map")


def _half_split(count: int, rng: np.random.Generator) -> np.ndarray:
    order = rng.permutation(count)
    arms = np.full(count, int(Arm.CONTROL), dtype=np.int8)
    arms[order[: count // 2]] = int(Arm.TREATMENT)
    return arms


def assign_ab(
    design: DesignKind,
    graph: AttributedGraph,
    rng: np.random.Generator,
    clustering: Optional[Clustering] = None,
    match_map: Optional[ClusterMatchMap] = None,
) -> np.ndarray:
    """Pre-assign every node an arm for an A/B design.

    Node and cluster designs shuffle their units and treat the first half.
    The CMatch design flips one fair coin per matched pair to pick which mate
    is treated, and one coin per unmatched cluster.
    """

    design = DesignKind(design)
    if design.is_bandit:
        raise ConfigurationError(f"{design.value} is not an A/B design")
    _require_structures(design, clustering, match_map)

    if design == DesignKind.NODE_AB:
        return _half_split(graph.n_nodes, rng)

    assert clustering is not None
    if design == DesignKind.CLUSTER_AB:
        cluster_arms = _half_split(clustering.n_clusters, rng)
    else:
        assert match_map is not None
        cluster_arms = np.full(clustering.n_clusters, UNASSIGNED, dtype=np.int8)
        for cluster in range(clustering.n_clusters):
            if cluster_arms[cluster] != UNASSIGNED:
                continue
            coin = int(rng.integers(0, 2))
            cluster_arms[cluster] = coin
            mate = match_map.mate(cluster)
            if mate is not None:
                cluster_arms[mate] = 1 - coin

    return cluster_arms[clustering.labels].astype(np.int8)


def mab_select(
    design: DesignKind,
    node: int,
    state: BanditState,
    world: SimulationWorld,
    cluster_arms: MutableMapping[int, Arm],
    clustering: Optional[Clustering] = None,
    match_map: Optional[ClusterMatchMap] = None,
) -> Arm:
    """Choose the arm for an arriving node.

    ``cluster_arms`` records the arm of every cluster that already holds an
    explored node; it is updated here on a cluster's first assignment.
    ``state.t`` must already count the current arrival.
    """

    design = DesignKind(design)
    if not design.is_bandit:
        raise ConfigurationError(f"{design.value} is not a bandit design")
    _require_structures(design, clustering, match_map)
    if world.explored[node]:
        raise ContractViolation(f"node {node} was already explored")

    if design == DesignKind.NODE_MAB:
        return ucb_select(state)

    assert clustering is not None
    cluster = clustering.cluster_of(node)
    recorded = cluster_arms.get(cluster)
    if recorded is not None:
        return recorded

    arm: Optional[Arm] = None
    if design == DesignKind.CMATCH_MAB:
        assert match_map is not None
        mate = match_map.mate(cluster)
        if mate is not None and mate in cluster_arms:
            arm = cluster_arms[mate].complement
    if arm is None:
        arm = ucb_select(state)

    cluster_arms[cluster] = arm
    return arm


def check_cluster_consistency(
    world: SimulationWorld,
    clustering: Clustering,
    cluster_arms: Dict[int, Arm],
    node: int,
) -> None:
    """Abort when the arrival's arm contradicts its cluster's recorded arm."""

    cluster = clustering.cluster_of(node)
    recorded = cluster_arms.get(cluster)
    actual = world.arm_of(node)
    if recorded is None or actual != recorded:
        raise InvariantViolation(
            f"cluster {cluster} holds arm {recorded} but node {node} took {actual}"
        )
