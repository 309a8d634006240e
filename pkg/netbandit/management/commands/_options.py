"""Flags shared by the experiment commands and the merge of their sources."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Type

from django import forms
from django.core.management import CommandError

from netbandit.cache import StaleCacheError
from netbandit.config import load_config_file
from netbandit.designs import DESIGN_CHOICES, ConfigurationError
from netbandit.errors import ContractViolation, InvariantViolation
from netbandit.graph import DatasetFormatError
from netbandit.utils import DEFAULT_EXPERIMENT_SETTINGS

# Failures a command reports as a CommandError rather than a traceback.
DOMAIN_ERRORS = (
    ContractViolation,
    InvariantViolation,
    DatasetFormatError,
    ConfigurationError,
    StaleCacheError,
    FileNotFoundError,
)

_DESIGN_NAMES = [value for value, _ in DESIGN_CHOICES]


def add_experiment_arguments(parser) -> None:
    # Every default is None so an unset flag never hides a config file value.
    parser.add_argument("--config", type=Path, help="Flat TOML file of option values.")
    parser.add_argument("--dataset", help="Dataset name under NETBANDIT_DATA_ROOT, or a directory.")
    parser.add_argument(
        "--design",
        dest="designs",
        action="append",
        choices=_DESIGN_NAMES,
        help="Design to run; repeat for several. Defaults to all six.",
    )
    parser.add_argument("--runs", type=int)
    parser.add_argument("--interval", type=int, help="Arrivals between checkpoints.")
    parser.add_argument("--p-treated", dest="p_treated", type=float)
    parser.add_argument("--p-control", dest="p_control", type=float)
    parser.add_argument("--seed", type=int, help="Master seed.")
    parser.add_argument("--out", dest="output_dir", help="Results directory.")
    parser.add_argument(
        "--explore-fraction",
        dest="explore_fraction",
        type=float,
        help="Stop each run after this fraction of the nodes has arrived.",
    )
    parser.add_argument("--random-ties", dest="random_ties", action="store_true", default=None)
    parser.add_argument("--event-log", dest="event_log", action="store_true", default=None)
    parser.add_argument(
        "--recluster",
        action="store_true",
        default=None,
        help="Rebuild the cached clustering and matching.",
    )
    parser.add_argument("--expansion", type=int)
    parser.add_argument("--inflation", type=float)
    parser.add_argument("--prune-threshold", dest="prune_threshold", type=float)
    parser.add_argument("--max-iterations", dest="max_iterations", type=int)
    parser.add_argument("--convergence-epsilon", dest="convergence_epsilon", type=float)
    parser.add_argument("--gamma-sample-size", dest="gamma_sample_size", type=int)
    parser.add_argument("--matching-seed", dest="matching_seed", type=int)


def merge_options(options: Dict[str, Any]) -> Dict[str, Any]:
    """Built-in defaults, then the config file, then explicit flags."""

    merged = dict(DEFAULT_EXPERIMENT_SETTINGS)
    config_path = options.get("config")
    if config_path:
        try:
            from_file = load_config_file(Path(config_path))
        except (OSError, ValueError) as exc:
            raise CommandError(f"Could not read config file {config_path}: {exc}") from exc
        unknown = sorted(set(from_file) - set(DEFAULT_EXPERIMENT_SETTINGS) - {"dataset"})
        if unknown:
            raise CommandError(
                f"Unknown keys in config file {config_path}: {', '.join(unknown)}"
            )
        merged.update(from_file)

    for key, value in options.items():
        if key in merged or key == "dataset":
            if value is not None:
                merged[key] = value

    alphas = merged.get("alphas")
    if isinstance(alphas, (list, tuple)):
        merged["alphas"] = ",".join(str(alpha) for alpha in alphas)
    return merged


def validated_form(form_class: Type[forms.Form], data: Dict[str, Any]) -> forms.Form:
    form = form_class(data=data)
    if not form.is_valid():
        problems = []
        for field, errors in form.errors.items():
            label = "options" if field == "__all__" else field
            problems.append(f"{label}: {' '.join(errors)}")
        raise CommandError("Invalid options: " + "; ".join(problems))
    return form
