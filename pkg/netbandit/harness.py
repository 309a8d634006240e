"""Dataset preparation, multi-run experiments, alpha sweeps and result files."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import partial
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import numpy as np
import pandas as pd
from django.conf import settings as django_settings

from .arms import Arm
from .cache import ClusterStructures, dataset_digest, load_or_build
from .clustering import Clustering
from .cmatch import ClusterMatchMap
from .config import ExperimentConfig, SweepConfig
from .designs import (
    BanditState,
    assign_ab,
    check_cluster_consistency,
    mab_select,
    ucb_update,
)
from .graph import AttributedGraph, dataset_files, load_dataset
from .interference import SimulationWorld, WorldConfig, make_rng, process_arrival
from .metrics import (
    TRACE_COLUMNS,
    Checkpoint,
    aggregate_traces,
    checkpoint_trace,
    final_checkpoints,
    trace_rows,
)
from .paths import ensure_cache_dir_exists
from .utils import (
    STREAM_ARRIVALS,
    STREAM_ASSIGNMENT,
    STREAM_OUTCOMES,
    STREAM_TIES,
    stream_seed,
)

logger = logging.getLogger(__name__)

TRACE_FILE = "trace.csv"
AGGREGATE_FILE = "aggregate.csv"
SWEEP_FILE = "sweep.csv"
MANIFEST_FILE = "manifest.json"
EVENTS_FILE = "events.jsonl"

SWEEP_COLUMNS = ["dataset", "design", "alpha", "runs", "rmse_pct", "ra_ratio"]

_FLOAT_FORMAT = "%.10g"


@dataclass(frozen=True, eq=False)
class PreparedDataset:
    name: str
    graph: AttributedGraph
    clustering: Optional[Clustering] = None
    match_map: Optional[ClusterMatchMap] = None
    manifest: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class RunResult:
    run: int
    checkpoints: List[Checkpoint]
    events: Optional[List[Dict[str, Any]]] = None


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    config: ExperimentConfig
    runs: List[RunResult]
    traces: pd.DataFrame
    aggregate: pd.DataFrame


@dataclass(frozen=True, eq=False)
class SweepResult:
    sweep: SweepConfig
    table: pd.DataFrame
    aggregate: pd.DataFrame


def dataset_label(dataset: str) -> str:
    return Path(dataset).name or str(dataset)


def prepare_dataset(config: ExperimentConfig, with_clusters: bool = True) -> PreparedDataset:
    """Load the graph and, when asked, its cached clustering and matching."""

    name = dataset_label(config.dataset)
    files = dataset_files(config.dataset)
    digest = dataset_digest(files)
    graph = load_dataset(config.dataset)
    manifest: Dict[str, Any] = {
        "dataset_sha256": digest,
        "graph": graph.summary.as_dict() if graph.summary else None,
    }
    if not with_clusters:
        return PreparedDataset(name=name, graph=graph, manifest=manifest)

    structures: ClusterStructures = load_or_build(
        ensure_cache_dir_exists(name),
        graph,
        digest,
        config.mcl,
        config.thresholds,
        recluster=config.recluster,
    )
    manifest["cache"] = structures.manifest
    return PreparedDataset(
        name=name,
        graph=graph,
        clustering=structures.clustering,
        match_map=structures.match_map,
        manifest=manifest,
    )


def arrival_order(n_nodes: int, master_seed: int, run: int) -> np.ndarray:
    """Uniform random arrival permutation, identical across designs for a run."""

    return make_rng(stream_seed(master_seed, run, STREAM_ARRIVALS)).permutation(n_nodes)


def _explore(
    config: ExperimentConfig,
    graph: AttributedGraph,
    world: SimulationWorld,
    order: np.ndarray,
    state: BanditState,
    clustering: Optional[Clustering],
    match_map: Optional[ClusterMatchMap],
    world_config: WorldConfig,
) -> Iterator[SimulationWorld]:
    design = config.design
    cluster_arms: Dict[int, Arm] = {}
    for node in order:
        node = int(node)
        if design.is_bandit:
            state.t += 1
            arm = mab_select(
                design, node, state, world, cluster_arms, clustering, match_map
            )
        else:
            arm = Arm(int(world.arms[node]))

        report = process_arrival(node, arm, world, graph, world_config)

        if design.is_bandit:
            ucb_update(state, arm, report.reward)
            if design.needs_clustering:
                assert clustering is not None
                check_cluster_consistency(world, clustering, cluster_arms, node)
        yield world


def simulate_run(
    config: ExperimentConfig,
    graph: AttributedGraph,
    clustering: Optional[Clustering],
    match_map: Optional[ClusterMatchMap],
    run: int,
) -> RunResult:
    """Explore the graph once under ``config.design`` and checkpoint the run."""

    order = arrival_order(graph.n_nodes, config.seed, run)
    limit = math.ceil(config.explore_fraction * graph.n_nodes)
    order = order[:limit]

    world_config = config.world_config(stream_seed(config.seed, run, STREAM_OUTCOMES))
    arms = None
    if not config.design.is_bandit:
        arms = assign_ab(
            config.design,
            graph,
            make_rng(stream_seed(config.seed, run, STREAM_ASSIGNMENT)),
            clustering,
            match_map,
        )
    world = SimulationWorld.create(graph, world_config, arms, record_events=config.event_log)
    state = BanditState(
        alpha=config.alpha,
        random_ties=config.random_ties,
        rng=make_rng(stream_seed(config.seed, run, STREAM_TIES)),
    )

    try:
        checkpoints = checkpoint_trace(
            _explore(config, graph, world, order, state, clustering, match_map, world_config),
            config.interval,
        )
    except Exception:
        logger.exception("Run %d of %s failed.", run, config.design.value)
        raise
    return RunResult(run=run, checkpoints=checkpoints, events=world.events)


def _simulate_all(
    config: ExperimentConfig, prepared: PreparedDataset, workers: int
) -> List[RunResult]:
    task = partial(
        simulate_run, config, prepared.graph, prepared.clustering, prepared.match_map
    )
    runs = range(1, config.runs + 1)
    if workers <= 1 or config.runs == 1:
        return [task(run) for run in runs]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(task, runs))


def run_experiment(
    config: ExperimentConfig,
    prepared: Optional[PreparedDataset] = None,
    workers: Optional[int] = None,
) -> ExperimentResult:
    """Run ``config.runs`` seeded runs of one design and aggregate them."""

    if prepared is None:
        prepared = prepare_dataset(config, with_clusters=config.design.needs_clustering)
    if workers is None:
        workers = django_settings.NETBANDIT_WORKERS

    logger.info(
        "Running %s on %s: %d runs, alpha=%s.",
        config.design.value,
        prepared.name,
        config.runs,
        config.alpha,
    )
    runs = _simulate_all(config, prepared, workers)

    alpha = config.alpha if config.design.is_bandit else None
    rows: List[Dict[str, object]] = []
    for result in runs:
        rows.extend(
            trace_rows(
                result.checkpoints,
                dataset=prepared.name,
                design=config.design.value,
                alpha=alpha,
                run=result.run,
                true_tte=config.true_tte,
            )
        )
    traces = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    aggregate = aggregate_traces(traces, config.true_tte)
    return ExperimentResult(config=config, runs=runs, traces=traces, aggregate=aggregate)


def run_alpha_sweep(
    sweep: SweepConfig,
    prepared: Optional[PreparedDataset] = None,
    workers: Optional[int] = None,
) -> SweepResult:
    """Final-checkpoint RMSE% and R/A for every (design, alpha) cell.

    A/B designs ignore alpha and are run once.
    """

    if prepared is None:
        needs_clusters = any(design.needs_clustering for design in sweep.designs)
        prepared = prepare_dataset(sweep.base, with_clusters=needs_clusters)

    table_rows = []
    aggregates = []
    for design in sweep.designs:
        alphas = sweep.alphas if design.is_bandit else (sweep.base.alpha,)
        for alpha in alphas:
            result = run_experiment(sweep.base.for_design(design, alpha), prepared, workers)
            aggregates.append(result.aggregate)
            for row in final_checkpoints(result.aggregate).itertuples(index=False):
                table_rows.append(
                    {
                        "dataset": row.dataset,
                        "design": row.design,
                        "alpha": row.alpha,
                        "runs": row.runs,
                        "rmse_pct": row.rmse_pct,
                        "ra_ratio": row.ra_ratio,
                    }
                )

    table = pd.DataFrame(table_rows, columns=SWEEP_COLUMNS)
    aggregate = pd.concat(aggregates, ignore_index=True) if aggregates else pd.DataFrame()
    return SweepResult(sweep=sweep, table=table, aggregate=aggregate)


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=_FLOAT_FORMAT)
    return path


def write_experiment_outputs(
    output_dir: Path,
    results: List[ExperimentResult],
    prepared: PreparedDataset,
) -> List[Path]:
    """Write traces, aggregates, manifest and optional event logs for ``results``."""

    output_dir.mkdir(parents=True, exist_ok=True)
    traces = pd.concat([result.traces for result in results], ignore_index=True)
    aggregate = pd.concat([result.aggregate for result in results], ignore_index=True)
    written = [
        _write_csv(traces, output_dir / TRACE_FILE),
        _write_csv(aggregate, output_dir / AGGREGATE_FILE),
    ]

    events = [
        (result.config.design.value, run)
        for result in results
        for run in result.runs
        if run.events is not None
    ]
    if events:
        path = output_dir / EVENTS_FILE
        with path.open("w", encoding="utf-8") as handle:
            for design, run in events:
                for event in run.events or ():
                    record = dict(event, design=design, run=run.run)
                    record["node"] = prepared.graph.node_ids[event["node"]]
                    handle.write(json.dumps(record, sort_keys=True) + "\n")
        written.append(path)

    manifest = {
        "experiments": [result.config.as_manifest() for result in results],
        "dataset": prepared.manifest,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    path = output_dir / MANIFEST_FILE
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(path)
    logger.info("Wrote %d result files to %s.", len(written), output_dir)
    return written


def write_sweep_outputs(
    output_dir: Path, result: SweepResult, prepared_manifest: Dict[str, Any]
) -> List[Path]:
    output_dir.mkdir(parents=True, exist_ok=True)
    written = [
        _write_csv(result.table, output_dir / SWEEP_FILE),
        _write_csv(result.aggregate, output_dir / AGGREGATE_FILE),
    ]
    manifest = {
        "sweep": {
            "base": result.sweep.base.as_manifest(),
            "alphas": list(result.sweep.alphas),
            "designs": [design.value for design in result.sweep.designs],
        },
        "dataset": prepared_manifest,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    path = output_dir / MANIFEST_FILE
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(path)
    logger.info("Wrote sweep results to %s.", output_dir)
    return written
