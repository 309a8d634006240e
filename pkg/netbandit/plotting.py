"""SVG figures: R/A against TTE error across alpha, and metrics against arrivals."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import matplotlib as mpl

mpl.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from .designs import DesignKind

logger = logging.getLogger(__name__)

# Fixed ids and no timestamp keep the SVG bytes reproducible.
mpl.rcParams.update(
    {
        "svg.hashsalt": "netbandit",
        "svg.fonttype": "none",
        "font.size": 10,
        "legend.fontsize": 8,
        "axes.labelsize": 10,
    }
)
_SVG_METADATA = {"Date": None}

_DESIGN_COLORMAPS = {
    DesignKind.NODE_MAB.value: "Blues",
    DesignKind.CLUSTER_MAB.value: "Oranges",
    DesignKind.CMATCH_MAB.value: "Greens",
}
_DESIGN_COLORS = {
    DesignKind.NODE_AB.value: "tab:blue",
    DesignKind.CLUSTER_AB.value: "tab:orange",
    DesignKind.CMATCH_AB.value: "tab:green",
    DesignKind.NODE_MAB.value: "navy",
    DesignKind.CLUSTER_MAB.value: "saddlebrown",
    DesignKind.CMATCH_MAB.value: "darkgreen",
}
_AB_MARKER = "s"
_MAB_MARKER = "o"

TRACE_METRICS = {
    "rmse_pct": ("TTE error (% RMSE)", "trace_tte_error.svg"),
    "ra_ratio": ("Reward-action ratio", "trace_ra_ratio.svg"),
}


@dataclass(frozen=True)
class TradeoffSeries:
    design: str
    alphas: np.ndarray
    rmse_pct: np.ndarray
    ra_ratio: np.ndarray
    intensity: np.ndarray


@dataclass(frozen=True)
class TraceLine:
    design: str
    label: str
    arrivals: np.ndarray
    values: np.ndarray


def _label(design: str) -> str:
    try:
        return DesignKind(design).label
    except ValueError:
        return design


def tradeoff_series(table: pd.DataFrame) -> List[TradeoffSeries]:
    """One series per design, sorted by alpha, with intensity rising with alpha."""

    series = []
    for design, group in table.groupby("design", sort=True):
        group = group.sort_values("alpha", na_position="first")
        alphas = group["alpha"].to_numpy(dtype=np.float64)
        finite = alphas[np.isfinite(alphas)]
        if finite.size > 1 and finite.max() > finite.min():
            scaled = (alphas - finite.min()) / (finite.max() - finite.min())
        else:
            scaled = np.ones_like(alphas)
        intensity = np.where(np.isfinite(scaled), 0.35 + 0.65 * scaled, 1.0)
        series.append(
            TradeoffSeries(
                design=str(design),
                alphas=alphas,
                rmse_pct=group["rmse_pct"].to_numpy(dtype=np.float64),
                ra_ratio=group["ra_ratio"].to_numpy(dtype=np.float64),
                intensity=intensity,
            )
        )
    return series


def trace_series(aggregate: pd.DataFrame, metric: str) -> List[TraceLine]:
    """One line per design and alpha, in arrival order."""

    lines: List[TraceLine] = []
    for (design, alpha), group in aggregate.groupby(["design", "alpha"], dropna=False, sort=True):
        label = _label(str(design))
        if pd.notna(alpha):
            label = f"{label} (alpha={alpha:g})"
        group = group.sort_values("arrivals")
        lines.append(
            TraceLine(
                design=str(design),
                label=label,
                arrivals=group["arrivals"].to_numpy(),
                values=group[metric].to_numpy(dtype=np.float64),
            )
        )
    return lines


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", bbox_inches="tight", metadata=_SVG_METADATA)
    plt.close(fig)
    return path


def plot_tradeoff(table: pd.DataFrame, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for series in tradeoff_series(table):
        if series.design in _DESIGN_COLORMAPS:
            colors = mpl.colormaps[_DESIGN_COLORMAPS[series.design]](series.intensity)
            marker = _MAB_MARKER
        else:
            colors = [_DESIGN_COLORS.get(series.design, "black")] * len(series.alphas)
            marker = _AB_MARKER
        ax.scatter(
            series.rmse_pct,
            series.ra_ratio,
            c=colors,
            marker=marker,
            edgecolors="black",
            linewidths=0.3,
            label=_label(series.design),
        )
    ax.set_xlabel("TTE error (% RMSE)")
    ax.set_ylabel("Reward-action ratio")
    ax.legend(loc="best")
    return _save(fig, path)


def plot_trace(aggregate: pd.DataFrame, metric: str, path: Path) -> Path:
    ylabel, _ = TRACE_METRICS[metric]
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for line in trace_series(aggregate, metric):
        ax.plot(
            line.arrivals,
            line.values,
            label=line.label,
            color=_DESIGN_COLORS.get(line.design),
        )
    ax.set_xlabel("Node arrivals")
    ax.set_ylabel(ylabel)
    ax.legend(loc="best")
    return _save(fig, path)


def emit_plots(
    output_dir: Path,
    sweep_table: Optional[pd.DataFrame] = None,
    aggregate: Optional[pd.DataFrame] = None,
) -> List[Path]:
    """Render whichever figures the given results support."""

    written: List[Path] = []
    output_dir.mkdir(parents=True, exist_ok=True)
    if sweep_table is not None and not sweep_table.empty:
        written.append(plot_tradeoff(sweep_table, output_dir / "tradeoff.svg"))
    if aggregate is not None and not aggregate.empty:
        for metric, (_, filename) in TRACE_METRICS.items():
            written.append(plot_trace(aggregate, metric, output_dir / filename))
    if not written:
        logger.warning("No results to plot in %s.", output_dir)
    return written
