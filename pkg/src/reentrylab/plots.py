"""SVG figures for evaluation reports.

Output is deterministic: the Agg backend is forced, SVG element ids are
salted with a fixed string, and the creation date is stripped, so the same
report always serializes to byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import CorrelationMatrix, ExperimentReport

matplotlib.rcParams["svg.hashsalt"] = "reentrylab"

_SAVE_KWARGS = {"format": "svg", "metadata": {"Date": None}}

PLOT_METRICS = ("accuracy", "precision", "recall", "f1", "fpr", "fnr")


def plot_metric_bars(report: ExperimentReport, path: str) -> None:
    """Grouped bars: one cluster per metric, one bar per model."""
    kinds = sorted(report.models)
    n_metrics = len(PLOT_METRICS)
    n_models = len(kinds)
    width = 0.8 / n_models
    x = np.arange(n_metrics)
    fig, ax = plt.subplots(figsize=(9, 4.5))
    for m, kind in enumerate(kinds):
        means = report.models[kind].means()
        heights = [means[name] for name in PLOT_METRICS]
        ax.bar(x + (m - (n_models - 1) / 2) * width, heights, width, label=kind)
    ax.set_xticks(x)
    ax.set_xticklabels(PLOT_METRICS)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("mean over folds")
    ax.set_title(f"{report.folds}-fold x {report.repetitions} repetitions")
    ax.legend(ncol=min(n_models, 5), fontsize="small")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def plot_correlation_heatmap(matrix: CorrelationMatrix, path: str) -> None:
    """Signed heatmap of the feature x feature correlation matrix."""
    n = len(matrix.names)
    values = np.where(matrix.defined, matrix.values, np.nan)
    fig, ax = plt.subplots(figsize=(6, 5))
    image = ax.imshow(values, vmin=-1.0, vmax=1.0, cmap="coolwarm")
    ax.set_xticks(range(n))
    ax.set_yticks(range(n))
    ax.set_xticklabels(matrix.names, rotation=45, ha="right")
    ax.set_yticklabels(matrix.names)
    for i in range(n):
        for j in range(n):
            text = f"{values[i, j]:.2f}" if matrix.defined[i, j] else "n/a"
            ax.text(j, i, text, ha="center", va="center", fontsize=8)
    fig.colorbar(image, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


__all__ = ["plot_metric_bars", "plot_correlation_heatmap", "PLOT_METRICS"]
