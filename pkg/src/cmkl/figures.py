"""Matplotlib rendering of report figures (accuracy bars, kernel weights)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import DataError
from .report import ExperimentReport

plt.rcParams.update(
    {
        "figure.dpi": 120,
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "axes.axisbelow": True,
    }
)


def _accuracy_figure(report: ExperimentReport, path: str):
    rows = [r for r in report.rows if r.status == "ok"]
    if not rows:
        return False
    names = [r.method for r in rows]
    utility = [r.utility_pct for r in rows]
    privacy = [r.privacy_pct for r in rows]
    pos = np.arange(len(rows))
    height = 0.38
    fig, ax = plt.subplots(figsize=(7.0, 1.0 + 0.55 * len(rows)))
    ax.barh(pos + height / 2, utility, height, label="utility", color="#2c7fb8")
    ax.barh(pos - height / 2, privacy, height, label="privacy", color="#d95f0e")
    ax.axvline(
        report.baselines["utility_pct"], color="#2c7fb8", ls="--", lw=1,
        label="random guess (utility)",
    )
    ax.axvline(
        report.baselines["privacy_pct"], color="#d95f0e", ls="--", lw=1,
        label="random guess (privacy)",
    )
    ax.set_yticks(pos)
    ax.set_yticklabels(names)
    ax.invert_yaxis()
    ax.set_xlabel("accuracy (%)")
    ax.set_xlim(0, 100)
    ax.legend(loc="lower right", fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return True


def _weights_figure(report: ExperimentReport, path: str):
    rows = [r for r in report.rows if r.status == "ok" and r.weights]
    multi = [r for r in rows if not r.method.startswith("single:")]
    if not multi:
        return False
    kernel_names = list(multi[0].weights)
    pos = np.arange(len(kernel_names))
    width = 0.8 / len(multi)
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    for i, r in enumerate(multi):
        offsets = pos + (i - (len(multi) - 1) / 2) * width
        ax.bar(offsets, [r.weights[k] for k in kernel_names], width, label=r.method)
    ax.set_xticks(pos)
    ax.set_xticklabels(kernel_names, rotation=20, ha="right")
    ax.set_ylabel("kernel weight")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return True


def render_report_figures(report: ExperimentReport, out_dir: str) -> dict:
    """Write accuracy.png and weights.png; returns the paths actually written."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        paths = {}
        acc = os.path.join(out_dir, "accuracy.png")
        if _accuracy_figure(report, acc):
            paths["accuracy_figure"] = acc
        weights = os.path.join(out_dir, "weights.png")
        if _weights_figure(report, weights):
            paths["weights_figure"] = weights
        return paths
    except OSError as exc:
        raise DataError(f"cannot write figures under {out_dir}: {exc}") from exc
