"""TTE estimate, reward-action ratio, checkpoints and cross-run RMSE."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from .arms import Arm
from .errors import ContractViolation
from .interference import SimulationWorld

TRACE_COLUMNS = [
    "dataset",
    "design",
    "alpha",
    "run",
    "arrivals",
    "n_treated",
    "n_control",
    "tte_estimate",
    "tte_error_pct",
    "ra_ratio",
]

AGGREGATE_COLUMNS = [
    "dataset",
    "design",
    "alpha",
    "arrivals",
    "runs",
    "defined_runs",
    "rmse_pct",
    "ra_ratio",
]

_GROUP_KEYS = ["dataset", "design", "alpha", "arrivals"]


@dataclass(frozen=True)
class Checkpoint:
    """Cumulative metrics over every node explored so far.

    ``tte_estimate`` is ``None`` until both arms hold an explored node.
    """

    arrivals: int
    tte_estimate: Optional[float]
    ra_ratio: float
    n_treated: int
    n_control: int


def estimate_tte(world: SimulationWorld) -> Optional[float]:
    """Difference of mean explored outcomes, Treatment minus Control."""

    treated = world.explored & (world.arms == int(Arm.TREATMENT))
    control = world.explored & (world.arms == int(Arm.CONTROL))
    if not treated.any() or not control.any():
        return None
    return float(world.outcomes[treated].mean() - world.outcomes[control].mean())


def reward_action_ratio(world: SimulationWorld) -> float:
    """Fraction of explored nodes that are active."""

    explored = world.n_explored
    if explored == 0:
        raise ContractViolation("reward-action ratio needs at least one explored node")
    return float(world.outcomes[world.explored].sum()) / explored


def rmse_percent(estimates: Sequence[float], true_tte: float) -> float:
    """Root mean squared error of ``estimates`` as a percentage of ``true_tte``."""

    if true_tte == 0:
        raise ContractViolation("RMSE percentage is undefined for a zero true effect")
    values = np.asarray(estimates, dtype=np.float64)
    if values.size == 0:
        raise ContractViolation("RMSE needs at least one estimate")
    return math.sqrt(float(np.mean((true_tte - values) ** 2))) / true_tte * 100.0


def take_checkpoint(world: SimulationWorld) -> Checkpoint:
    return Checkpoint(
        arrivals=world.n_explored,
        tte_estimate=estimate_tte(world),
        ra_ratio=reward_action_ratio(world),
        n_treated=world.n_treated,
        n_control=world.n_control,
    )


def checkpoint_trace(
    worlds: Iterable[SimulationWorld], interval: int = 50
) -> List[Checkpoint]:
    """Checkpoint a run every ``interval`` arrivals plus once at the end.

    ``worlds`` yields the world after each arrival.
    """

    if interval < 1:
        raise ContractViolation("checkpoint interval must be at least 1")

    checkpoints: List[Checkpoint] = []
    world: Optional[SimulationWorld] = None
    for world in worlds:
        if world.n_explored % interval == 0:
            checkpoints.append(take_checkpoint(world))

    if world is not None and world.n_explored and (
        not checkpoints or checkpoints[-1].arrivals != world.n_explored
    ):
        checkpoints.append(take_checkpoint(world))
    return checkpoints


def tte_error_percent(estimate: Optional[float], true_tte: float) -> float:
    if estimate is None:
        return math.nan
    return abs(true_tte - estimate) / true_tte * 100.0


def trace_rows(
    checkpoints: Iterable[Checkpoint],
    *,
    dataset: str,
    design: str,
    alpha: Optional[float],
    run: int,
    true_tte: float,
) -> List[Dict[str, object]]:
    return [
        {
            "dataset": dataset,
            "design": design,
            "alpha": alpha,
            "run": run,
            "arrivals": checkpoint.arrivals,
            "n_treated": checkpoint.n_treated,
            "n_control": checkpoint.n_control,
            "tte_estimate": (
                math.nan if checkpoint.tte_estimate is None else checkpoint.tte_estimate
            ),
            "tte_error_pct": tte_error_percent(checkpoint.tte_estimate, true_tte),
            "ra_ratio": checkpoint.ra_ratio,
        }
        for checkpoint in checkpoints
    ]


def aggregate_traces(traces: pd.DataFrame, true_tte: float) -> pd.DataFrame:
    """Per-checkpoint RMSE percentage and mean R/A across runs.

    Runs are aligned by arrival count. RMSE uses only runs whose estimate is
    defined at that checkpoint and is NaN when none is.
    """

    if traces.empty:
        return pd.DataFrame(columns=AGGREGATE_COLUMNS)

    rows = []
    grouped = traces.groupby(_GROUP_KEYS, dropna=False, sort=True)
    for (dataset, design, alpha, arrivals), group in grouped:
        defined = group["tte_estimate"].dropna()
        rows.append(
            {
                "dataset": dataset,
                "design": design,
                "alpha": alpha,
                "arrivals": int(arrivals),
                "runs": int(group["run"].nunique()),
                "defined_runs": int(defined.shape[0]),
                "rmse_pct": (
                    rmse_percent(defined.to_numpy(), true_tte) if len(defined) else math.nan
                ),
                "ra_ratio": float(group["ra_ratio"].mean()),
            }
        )
    return pd.DataFrame(rows, columns=AGGREGATE_COLUMNS)


def final_checkpoints(aggregate: pd.DataFrame) -> pd.DataFrame:
    """Rows at the largest arrival count of each (dataset, design, alpha) cell."""

    if aggregate.empty:
        return aggregate
    keys = ["dataset", "design", "alpha"]
    last = aggregate.groupby(keys, dropna=False, sort=False)["arrivals"].transform("max")
    return aggregate[aggregate["arrivals"] == last].reset_index(drop=True)
