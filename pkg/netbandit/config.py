"""Experiment and sweep configuration."""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from .clustering import MclParams
from .cmatch import ThresholdParams
from .designs import DesignKind
from .errors import ContractViolation
from .interference import WorldConfig

# Config file keys whose CLI flag stores under another name.
_FLAG_DESTINATIONS = {"out": "output_dir"}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    design: DesignKind = DesignKind.CLUSTER_MAB
    alpha: float = 8.0
    runs: int = 10
    interval: int = 50
    p_treated: float = 0.6
    p_control: float = 0.2
    seed: int = 42
    mcl: MclParams = field(default_factory=MclParams)
    thresholds: ThresholdParams = field(default_factory=ThresholdParams)
    output_dir: Path = Path("results")
    explore_fraction: float = 1.0
    random_ties: bool = False
    event_log: bool = False
    recluster: bool = False

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ContractViolation("runs must be at least 1")
        if self.interval < 1:
            raise ContractViolation("checkpoint interval must be at least 1")
        if self.alpha < 0:
            raise ContractViolation("alpha must be nonnegative")
        if not 0.0 < self.explore_fraction <= 1.0:
            raise ContractViolation("explore fraction must lie in (0, 1]")
        # Validates the probabilities.
        self.world_config(0)

    @property
    def true_tte(self) -> float:
        return self.p_treated - self.p_control

    def world_config(self, seed: int) -> WorldConfig:
        return WorldConfig(p_treated=self.p_treated, p_control=self.p_control, seed=seed)

    def for_design(self, design: DesignKind, alpha: Optional[float] = None) -> "ExperimentConfig":
        return replace(
            self,
            design=DesignKind(design),
            alpha=self.alpha if alpha is None else float(alpha),
        )

    @classmethod
    def from_cleaned(cls, cleaned: Mapping[str, Any], design: DesignKind) -> "ExperimentConfig":
        """Build a config from validated form data."""

        return cls(
            dataset=cleaned["dataset"],
            design=DesignKind(design),
            alpha=float(cleaned["alpha"]),
            runs=int(cleaned["runs"]),
            interval=int(cleaned["interval"]),
            p_treated=float(cleaned["p_treated"]),
            p_control=float(cleaned["p_control"]),
            seed=int(cleaned["seed"]),
            mcl=MclParams(
                expansion=int(cleaned["expansion"]),
                inflation=float(cleaned["inflation"]),
                prune_threshold=float(cleaned["prune_threshold"]),
                max_iterations=int(cleaned["max_iterations"]),
                convergence_epsilon=float(cleaned["convergence_epsilon"]),
            ),
            thresholds=ThresholdParams(
                sample_size=int(cleaned["gamma_sample_size"]),
                seed=int(cleaned["matching_seed"]),
            ),
            output_dir=Path(cleaned["output_dir"]),
            explore_fraction=float(cleaned["explore_fraction"]),
            random_ties=bool(cleaned["random_ties"]),
            event_log=bool(cleaned["event_log"]),
            recluster=bool(cleaned["recluster"]),
        )

    def as_manifest(self) -> Dict[str, Any]:
        return {
            "dataset": self.dataset,
            "design": self.design.value,
            "alpha": self.alpha,
            "runs": self.runs,
            "interval": self.interval,
            "p_treated": self.p_treated,
            "p_control": self.p_control,
            "true_tte": self.true_tte,
            "seed": self.seed,
            "explore_fraction": self.explore_fraction,
            "random_ties": self.random_ties,
            "mcl": self.mcl.as_dict(),
            "gamma_sample_size": self.thresholds.sample_size,
            "matching_seed": self.thresholds.seed,
        }


@dataclass(frozen=True)
class SweepConfig:
    base: ExperimentConfig
    alphas: Tuple[float, ...] = tuple(float(alpha) for alpha in range(1, 31))
    designs: Tuple[DesignKind, ...] = tuple(DesignKind)

    def __post_init__(self) -> None:
        if not self.alphas:
            raise ContractViolation("an alpha sweep needs at least one alpha")
        if not self.designs:
            raise ContractViolation("an alpha sweep needs at least one design")


def parse_alpha_list(text: str) -> Tuple[float, ...]:
    """Parse ``"1..30"`` (inclusive integer range) or ``"1,4,8"``."""

    values = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            start, _, stop = part.partition("..")
            first, last = int(start), int(stop)
            if last < first:
                raise ValueError(f"empty alpha range {part!r}")
            values.extend(float(alpha) for alpha in range(first, last + 1))
        else:
            values.append(float(part))
    if not values:
        raise ValueError("no alpha values given")
    return tuple(values)


def load_config_file(path: Path) -> Dict[str, Any]:
    """Read a flat TOML file of option names to values.

    Keys mirror the CLI flags: dashes are accepted as underscores, ``out``
    means ``output_dir`` and ``design`` may hold one name or a list.
    """

    with Path(path).open("rb") as handle:
        raw = tomllib.load(handle)

    options: Dict[str, Any] = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            raise ValueError(f"{path}: nested table {key!r} is not supported")
        key = key.replace("-", "_")
        options[_FLAG_DESTINATIONS.get(key, key)] = value
    if "design" in options and "designs" not in options:
        design = options.pop("design")
        options["designs"] = design if isinstance(design, list) else [design]
    return options
