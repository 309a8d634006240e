"""Exact outcome distributions for small graphs, built by full enumeration."""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from netbandit.arms import Arm
from netbandit.designs import DesignKind
from netbandit.interference import WorldConfig

Neighbors = Mapping[int, Sequence[Tuple[int, float]]]
# (arm per node, outcome per node, summed reward) of one complete run.
Realisation = Tuple[Tuple[int, ...], Tuple[int, ...], int]


def _arrivals(
    node: int,
    arm: int,
    arms: Sequence[int],
    outcomes: Tuple[int, ...],
    explored: Sequence[int],
    neighbors: Neighbors,
    config: WorldConfig,
) -> Iterator[Tuple[float, Tuple[int, ...], int]]:
    """Every way one arrival can end, with its probability and reward."""

    p_direct = config.p_treated if arm == Arm.TREATMENT else config.p_control
    sources = [
        p for other, p in neighbors[node]
        if other in explored and outcomes[other] and arms[other] != arm
    ]
    targets = [
        (other, p) for other, p in neighbors[node]
        if other in explored and not outcomes[other] and arms[other] != arm
    ]
    p_inbound = 1.0 - math.prod(1.0 - p for p in sources)
    p_active = p_direct + (1.0 - p_direct) * p_inbound

    yield 1.0 - p_active, outcomes, 0
    for hits in itertools.product((False, True), repeat=len(targets)):
        probability = p_active
        active = list(outcomes)
        active[node] = 1
        for (other, p), hit in zip(targets, hits):
            probability *= p if hit else 1.0 - p
            if hit:
                active[other] = 1
        yield probability, tuple(active), 1 + sum(hits)


def enumerate_outcomes(
    neighbors: Neighbors,
    order: Sequence[int],
    arms: Mapping[int, Arm],
    config: WorldConfig,
) -> Dict[Tuple[int, ...], float]:
    """Exact distribution of final outcomes under a fixed arm assignment."""

    fixed = [int(arms[node]) for node in range(len(neighbors))]
    distribution: Dict[Tuple[int, ...], float] = defaultdict(float)
    for (_, outcomes, _), weight in _fixed_arm_runs(neighbors, order, fixed, config).items():
        distribution[outcomes] += weight
    return dict(distribution)


def _fixed_arm_runs(
    neighbors: Neighbors,
    order: Sequence[int],
    arms: Sequence[int],
    config: WorldConfig,
) -> Dict[Realisation, float]:
    branches: List[Tuple[float, Tuple[int, ...], int]] = [(1.0, (0,) * len(neighbors), 0)]
    for step, node in enumerate(order):
        explored = order[:step]
        grown = []
        for weight, outcomes, reward in branches:
            for probability, after, gained in _arrivals(
                node, arms[node], arms, outcomes, explored, neighbors, config
            ):
                grown.append((weight * probability, after, reward + gained))
        branches = grown

    runs: Dict[Realisation, float] = defaultdict(float)
    for weight, outcomes, reward in branches:
        runs[(tuple(arms), outcomes, reward)] += weight
    return runs


def ab_assignments(
    design: DesignKind,
    labels: Sequence[int],
    mates: Mapping[int, int],
) -> List[Tuple[Tuple[int, ...], float]]:
    """Every arm vector an A/B design can draw, with its probability."""

    n_nodes = len(labels)
    n_clusters = max(labels) + 1
    if design == DesignKind.NODE_AB:
        units = n_nodes
    else:
        units = n_clusters

    unit_arms: List[Tuple[int, ...]] = []
    if design in (DesignKind.NODE_AB, DesignKind.CLUSTER_AB):
        for treated in itertools.combinations(range(units), units // 2):
            unit_arms.append(tuple(int(unit in treated) for unit in range(units)))
    else:
        deciders = [c for c in range(n_clusters) if c not in mates or c < mates[c]]
        for coins in itertools.product((0, 1), repeat=len(deciders)):
            arms = [0] * n_clusters
            for cluster, coin in zip(deciders, coins):
                arms[cluster] = coin
                if cluster in mates:
                    arms[mates[cluster]] = 1 - coin
            unit_arms.append(tuple(arms))

    probability = 1.0 / len(unit_arms)
    if design == DesignKind.NODE_AB:
        return [(arms, probability) for arms in unit_arms]
    return [(tuple(arms[label] for label in labels), probability) for arms in unit_arms]


@dataclass(frozen=True)
class _BanditBranch:
    weight: float
    arms: Tuple[int, ...]
    outcomes: Tuple[int, ...]
    reward: int
    mu_hat: Tuple[float, float] = (0.0, 0.0)
    m: Tuple[int, int] = (1, 1)
    cluster_arms: Tuple[Tuple[int, int], ...] = ()


def _ucb_arm(branch: _BanditBranch, t: int, alpha: float) -> int:
    scores = [
        branch.mu_hat[arm] + alpha * math.sqrt(2.0 * math.log(t) / branch.m[arm])
        for arm in (0, 1)
    ]
    return 1 if scores[1] > scores[0] else 0


def _bandit_arm(
    design: DesignKind,
    node: int,
    branch: _BanditBranch,
    t: int,
    alpha: float,
    labels: Sequence[int],
    mates: Mapping[int, int],
) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
    if design == DesignKind.NODE_MAB:
        return _ucb_arm(branch, t, alpha), branch.cluster_arms

    recorded = dict(branch.cluster_arms)
    cluster = labels[node]
    if cluster in recorded:
        return recorded[cluster], branch.cluster_arms
    mate: Optional[int] = mates.get(cluster)
    if design == DesignKind.CMATCH_MAB and mate in recorded:
        arm = 1 - recorded[mate]
    else:
        arm = _ucb_arm(branch, t, alpha)
    return arm, branch.cluster_arms + ((cluster, arm),)


def _bandit_runs(
    design: DesignKind,
    neighbors: Neighbors,
    order: Sequence[int],
    labels: Sequence[int],
    mates: Mapping[int, int],
    config: WorldConfig,
    alpha: float,
) -> Dict[Realisation, float]:
    n_nodes = len(neighbors)
    branches = [_BanditBranch(1.0, (-1,) * n_nodes, (0,) * n_nodes, 0)]
    for step, node in enumerate(order):
        explored = order[:step]
        grown = []
        for branch in branches:
            arm, cluster_arms = _bandit_arm(
                design, node, branch, step + 1, alpha, labels, mates
            )
            arms = list(branch.arms)
            arms[node] = arm
            for probability, after, gained in _arrivals(
                node, arm, arms, branch.outcomes, explored, neighbors, config
            ):
                count = branch.m[arm] + 1
                mu_hat = list(branch.mu_hat)
                mu_hat[arm] = (gained + (count - 1) * mu_hat[arm]) / count
                m = list(branch.m)
                m[arm] = count
                grown.append(
                    replace(
                        branch,
                        weight=branch.weight * probability,
                        arms=tuple(arms),
                        outcomes=after,
                        reward=branch.reward + gained,
                        mu_hat=(mu_hat[0], mu_hat[1]),
                        m=(m[0], m[1]),
                        cluster_arms=cluster_arms,
                    )
                )
        branches = grown

    runs: Dict[Realisation, float] = defaultdict(float)
    for branch in branches:
        runs[(branch.arms, branch.outcomes, branch.reward)] += branch.weight
    return runs


def enumerate_design(
    design: DesignKind,
    neighbors: Neighbors,
    order: Sequence[int],
    labels: Sequence[int],
    mates: Mapping[int, int],
    config: WorldConfig,
    alpha: float,
) -> Dict[Realisation, float]:
    """Exact distribution of complete runs of ``design`` for a fixed arrival order.

    ``labels`` gives each node's cluster and ``mates`` the symmetric cluster
    matching. Bandit ties go to Control.
    """

    design = DesignKind(design)
    if design.is_bandit:
        return dict(_bandit_runs(design, neighbors, order, labels, mates, config, alpha))

    runs: Dict[Realisation, float] = defaultdict(float)
    for arms, probability in ab_assignments(design, labels, mates):
        for realisation, weight in _fixed_arm_runs(neighbors, order, arms, config).items():
            runs[realisation] += probability * weight
    return dict(runs)
