"""Outcome simulation under direct treatment and one-hop cross-arm contagion.

Allowable (within-arm) spillover is part of the arm activation
probabilities; only cross-arm contagion is simulated edge by edge.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .arms import UNASSIGNED, Arm
from .errors import ContractViolation, InvariantViolation
from .graph import AttributedGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WorldConfig:
    p_treated: float = 0.6
    p_control: float = 0.2
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_control <= self.p_treated <= 1.0:
            raise ContractViolation(
                "activation probabilities must satisfy 0 <= p_control <= p_treated <= 1"
            )

    @property
    def true_tte(self) -> float:
        return self.p_treated - self.p_control

    def activation_probability(self, arm: Arm) -> float:
        return self.p_treated if arm == Arm.TREATMENT else self.p_control


@dataclass(frozen=True)
class ArrivalReport:
    node: int
    arm: Arm
    direct_activated: bool
    inbound_contagion: bool
    outbound_activations: Tuple[int, ...]
    reward: int

    @property
    def activated(self) -> bool:
        return self.direct_activated or self.inbound_contagion


def make_rng(seed: Any) -> np.random.Generator:
    """Counter-based stream (Philox) for one run."""

    return np.random.Generator(np.random.Philox(seed))


class SimulationWorld:
    """Per-node arm, outcome and explored flag for one experiment run.

    A world is owned by a single run; nothing in it is shared.
    """

    def __init__(
        self,
        n_nodes: int,
        rng: np.random.Generator,
        arms: Optional[np.ndarray] = None,
        record_events: bool = False,
    ) -> None:
        if arms is None:
            self.arms = np.full(n_nodes, UNASSIGNED, dtype=np.int8)
        else:
            if len(arms) != n_nodes:
                raise ContractViolation("arm assignment does not cover every node")
            self.arms = np.asarray(arms, dtype=np.int8).copy()
        self.outcomes = np.zeros(n_nodes, dtype=np.uint8)
        self.explored = np.zeros(n_nodes, dtype=bool)
        self.n_treated = 0
        self.n_control = 0
        self.rng = rng
        self.events: Optional[List[Dict[str, Any]]] = [] if record_events else None

    @classmethod
    def create(
        cls,
        graph: AttributedGraph,
        config: WorldConfig,
        arms: Optional[np.ndarray] = None,
        record_events: bool = False,
    ) -> "SimulationWorld":
        return cls(graph.n_nodes, make_rng(config.seed), arms, record_events)

    @property
    def n_nodes(self) -> int:
        return int(self.arms.shape[0])

    @property
    def n_explored(self) -> int:
        return self.n_treated + self.n_control

    def arm_of(self, node: int) -> Optional[Arm]:
        value = int(self.arms[node])
        return None if value == UNASSIGNED else Arm(value)


def _check_cross_arm(node: int, arm: Arm, other: int, arms: np.ndarray) -> None:
    if int(arms[other]) != arm.complement:
        raise InvariantViolation(
            f"contagion between {node} and {other} does not cross arms"
        )


def process_arrival(
    node: int,
    arm: Arm,
    world: SimulationWorld,
    graph: AttributedGraph,
    config: WorldConfig,
) -> ArrivalReport:
    """Explore ``node`` under ``arm`` and return the activations it caused.

    Draw order is fixed: one draw for the direct outcome, then one draw per
    eligible neighbor in ascending node index, first for inbound contagion
    (stopping at the first success) and then for outbound contagion.
    """

    if world.explored[node]:
        raise ContractViolation(f"node {node} was already explored")
    if arm not in (Arm.CONTROL, Arm.TREATMENT):
        raise ContractViolation(f"node {node} needs a treatment or control arm")
    arm = Arm(arm)
    preassigned = int(world.arms[node])
    if preassigned != UNASSIGNED and preassigned != arm:
        raise ContractViolation(
            f"node {node} was pre-assigned {Arm(preassigned).name}, not {arm.name}"
        )

    rng = world.rng
    arms, outcomes, explored = world.arms, world.outcomes, world.explored
    neighbors = graph.neighbors(node)

    direct = bool(rng.random() < config.activation_probability(arm))
    active = direct

    inbound = False
    inbound_source: Optional[int] = None
    if not active:
        for other, probability in neighbors:
            if explored[other] and outcomes[other] and arms[other] != arm:
                if rng.random() < probability:
                    _check_cross_arm(node, arm, other, arms)
                    inbound = True
                    inbound_source = other
                    break
        active = inbound

    outbound: List[int] = []
    if active:
        for other, probability in neighbors:
            if explored[other] and not outcomes[other] and arms[other] != arm:
                if rng.random() < probability:
                    _check_cross_arm(node, arm, other, arms)
                    outcomes[other] = 1
                    outbound.append(other)

    arms[node] = arm
    outcomes[node] = 1 if active else 0
    explored[node] = True
    if arm == Arm.TREATMENT:
        world.n_treated += 1
    else:
        world.n_control += 1

    report = ArrivalReport(
        node=node,
        arm=arm,
        direct_activated=direct,
        inbound_contagion=inbound,
        outbound_activations=tuple(outbound),
        reward=int(active) + len(outbound),
    )
    if world.events is not None:
        world.events.append(
            {
                "arrival": world.n_explored,
                "node": node,
                "arm": arm.name.lower(),
                "direct": direct,
                "inbound_from": inbound_source,
                "outbound": list(outbound),
                "reward": report.reward,
            }
        )
    return report


def ground_truth_outcome_mean(arm: Arm, config: WorldConfig) -> float:
    """Mean outcome in the world where every node receives ``arm``.

    A single-arm world has no cross-arm edges, so only the arm probability
    contributes.
    """

    return config.activation_probability(Arm(arm))
