"""Utility helpers for the experiment harness."""

from __future__ import annotations

import numpy as np

from .designs import DesignKind


DEFAULT_EXPERIMENT_SETTINGS = {
    "designs": [kind.value for kind in DesignKind],
    "alpha": 8.0,
    "runs": 10,
    "interval": 50,
    "p_treated": 0.6,
    "p_control": 0.2,
    "seed": 42,
    "explore_fraction": 1.0,
    "random_ties": False,
    "event_log": False,
    "recluster": False,
    "output_dir": "results",
    "expansion": 2,
    "inflation": 2.0,
    "prune_threshold": 1e-5,
    "max_iterations": 100,
    "convergence_epsilon": 1e-6,
    "gamma_sample_size": 200_000,
    "matching_seed": 0,
    "alphas": "1..30",
}

# Independent RNG streams derived for each run.
STREAM_ARRIVALS = 0
STREAM_ASSIGNMENT = 1
STREAM_OUTCOMES = 2
STREAM_TIES = 3


def stream_seed(master_seed: int, run: int, stream: int) -> int:
    """Derive a 64-bit seed for one stream of one run from the master seed.

    The arrival stream does not depend on the design, so every design sees
    the same arrival order for a given run index.
    """

    sequence = np.random.SeedSequence([int(master_seed), int(run), int(stream)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
