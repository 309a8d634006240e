"""Persisted clusterings and cluster matchings, reused by every design of a dataset."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, Tuple

from .clustering import Clustering, MclParams, mcl_cluster
from .cmatch import ClusterMatchMap, ThresholdParams, build_cmatch
from .graph import AttributedGraph

logger = logging.getLogger(__name__)

CLUSTERING_FILE = "clustering.json"
MATCHING_FILE = "matching.json"
MANIFEST_FILE = "manifest.json"


class StaleCacheError(RuntimeError):
    """Raised when cached structures were built from other data or parameters."""


@dataclass(frozen=True, eq=False)
class ClusterStructures:
    clustering: Clustering
    match_map: ClusterMatchMap
    manifest: Dict[str, Any]


def dataset_digest(files: Iterable[Tuple[Path, Path]]) -> str:
    """SHA-256 over the names and bytes of a dataset's content/cites files."""

    digest = hashlib.sha256()
    for content_path, cites_path in files:
        for path in (content_path, cites_path):
            digest.update(path.name.encode("utf-8"))
            digest.update(path.read_bytes())
    return digest.hexdigest()


def _parameters(mcl: MclParams, thresholds: ThresholdParams) -> Dict[str, Any]:
    return {
        "mcl": mcl.as_dict(),
        "gamma_sample_size": thresholds.sample_size,
        "matching_seed": thresholds.seed,
    }


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def save_structures(
    directory: Path, graph: AttributedGraph, structures: ClusterStructures
) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    _write_json(
        directory / CLUSTERING_FILE,
        {
            node_id: structures.clustering.assignment[index]
            for index, node_id in enumerate(graph.node_ids)
        },
    )
    _write_json(
        directory / MATCHING_FILE,
        {str(cluster): mate for cluster, mate in sorted(structures.match_map.match.items())},
    )
    _write_json(directory / MANIFEST_FILE, structures.manifest)


def load_structures(directory: Path, graph: AttributedGraph) -> ClusterStructures:
    manifest = json.loads((directory / MANIFEST_FILE).read_text(encoding="utf-8"))
    assignment = json.loads((directory / CLUSTERING_FILE).read_text(encoding="utf-8"))
    if set(assignment) != set(graph.node_ids):
        raise StaleCacheError(f"{directory}: cached clustering covers other nodes")

    clustering = Clustering.from_labels(
        (assignment[node_id] for node_id in graph.node_ids),
        converged=bool(manifest.get("converged", True)),
        iterations=int(manifest.get("iterations", 0)),
    )
    raw_match = json.loads((directory / MATCHING_FILE).read_text(encoding="utf-8"))
    match_map = ClusterMatchMap({int(cluster): int(mate) for cluster, mate in raw_match.items()})
    return ClusterStructures(clustering=clustering, match_map=match_map, manifest=manifest)


def build_structures(
    graph: AttributedGraph,
    mcl: MclParams,
    thresholds: ThresholdParams,
    digest: str,
) -> ClusterStructures:
    clustering = mcl_cluster(graph, mcl)
    cmatch = build_cmatch(graph, clustering, thresholds)
    manifest = {
        "dataset_sha256": digest,
        "parameters": _parameters(mcl, thresholds),
        "clusters": clustering.n_clusters,
        "converged": clustering.converged,
        "iterations": clustering.iterations,
        "graph": graph.summary.as_dict() if graph.summary else None,
        "matching": cmatch.metadata,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    return ClusterStructures(
        clustering=clustering, match_map=cmatch.match_map, manifest=manifest
    )


def load_or_build(
    directory: Path,
    graph: AttributedGraph,
    digest: str,
    mcl: MclParams,
    thresholds: ThresholdParams,
    recluster: bool = False,
) -> ClusterStructures:
    """Return cached structures for ``graph`` or build and persist them.

    A cache built from other data or parameters raises ``StaleCacheError``
    unless ``recluster`` is set, in which case it is rebuilt.
    """

    manifest_path = directory / MANIFEST_FILE
    if manifest_path.exists() and not recluster:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        expected = _parameters(mcl, thresholds)
        if manifest.get("dataset_sha256") != digest:
            raise StaleCacheError(
                f"{directory}: dataset files changed since clustering; rerun with --recluster"
            )
        if manifest.get("parameters") != expected:
            raise StaleCacheError(
                f"{directory}: cached parameters {manifest.get('parameters')} differ "
                f"from {expected}; rerun with --recluster"
            )
        logger.info("Reusing cached clustering from %s.", directory)
        return load_structures(directory, graph)

    structures = build_structures(graph, mcl, thresholds, digest)
    save_structures(directory, graph, structures)
    logger.info("Cached clustering and matching in %s.", directory)
    return structures
