"""Experiment report: structured JSON, delimited CSV, aligned text table.

The JSON form is the canonical machine-readable artifact: stable key order,
full-precision floats, and no timing fields, so identical runs emit identical
bytes.  Wall times appear only in the human-readable table.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field

from .errors import DataError

SCHEMA_VERSION = 1


def format_pct(x: float | None) -> str:
    """Render an accuracy percentage like 0.8567 * 100 -> '85.67'."""
    return "" if x is None else f"{x:.2f}"


@dataclass(frozen=True)
class MethodRow:
    """One evaluated method: a single release or a weighted combination."""

    method: str
    status: str  # "ok" | "failed"
    utility_pct: float | None = None
    privacy_pct: float | None = None
    best_c_utility: float | None = None
    best_c_privacy: float | None = None
    weights: dict | None = None  # kernel name -> weight
    rank_budget_ok: bool | None = None
    error: str | None = None
    wall_time_s: float | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "status": self.status,
            "utility_pct": self.utility_pct,
            "privacy_pct": self.privacy_pct,
            "best_c_utility": self.best_c_utility,
            "best_c_privacy": self.best_c_privacy,
            "weights": self.weights,
            "rank_budget_ok": self.rank_budget_ok,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "MethodRow":
        return cls(**raw)


@dataclass(frozen=True)
class ExperimentReport:
    """Full outcome of one experiment run."""

    dataset: dict  # sizes, class counts, label names
    kernels: list  # [{name, kind, gamma, degree, coef0, q}]
    settings: dict  # ridges, strategies, snr rhos, c grid, folds, seed
    baselines: dict  # random-guess utility/privacy percentages (exact)
    rank_budget: dict  # total released rank vs feature dimension
    snr_scores: dict  # str(rho) -> {kernel name -> score}
    rows: list  # list[MethodRow]
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "dataset": self.dataset,
            "kernels": self.kernels,
            "settings": self.settings,
            "baselines": self.baselines,
            "rank_budget": self.rank_budget,
            "snr_scores": self.snr_scores,
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentReport":
        raw = dict(raw)
        rows = [MethodRow.from_dict(r) for r in raw.pop("rows")]
        return cls(rows=rows, **raw)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))


def render_table(report: ExperimentReport) -> str:
    """Aligned text table: method rows under the random-guess baselines."""
    rows = [("Method", "Utility (%)", "Privacy (%)", "Time (s)")]
    rows.append(
        (
            "Random guess",
            format_pct(report.baselines["utility_pct"]),
            format_pct(report.baselines["privacy_pct"]),
            "",
        )
    )
    for r in report.rows:
        if r.status == "ok":
            rows.append(
                (
                    r.method,
                    format_pct(r.utility_pct),
                    format_pct(r.privacy_pct),
                    "" if r.wall_time_s is None else f"{r.wall_time_s:.2f}",
                )
            )
        else:
            rows.append((r.method, "failed", "failed", ""))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = []
    header, *body = rows
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    budget = report.rank_budget
    lines.append("")
    lines.append(
        "rank budget: total released rank {total_rank} vs feature dim "
        "{feature_dim} -> {verdict} (margin {margin})".format(
            total_rank=budget["total_rank"],
            feature_dim=budget["feature_dim"],
            verdict="compliant" if budget["passed"] else "NOT compliant",
            margin=budget["margin"],
        )
    )
    failed = [r for r in report.rows if r.status != "ok"]
    for r in failed:
        lines.append(f"failed: {r.method}: {r.error}")
    return "\n".join(lines) + "\n"


def render_csv(report: ExperimentReport) -> str:
    """Delimited per-method summary (percentages formatted to 2 decimals)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "method",
            "status",
            "utility_pct",
            "privacy_pct",
            "best_c_utility",
            "best_c_privacy",
            "rank_budget_ok",
            "weights",
            "error",
        ]
    )
    writer.writerow(
        [
            "random_guess",
            "baseline",
            format_pct(report.baselines["utility_pct"]),
            format_pct(report.baselines["privacy_pct"]),
            "",
            "",
            "",
            "",
            "",
        ]
    )
    for r in report.rows:
        weights = (
            ";".join(f"{k}={v:.6g}" for k, v in r.weights.items()) if r.weights else ""
        )
        writer.writerow(
            [
                r.method,
                r.status,
                format_pct(r.utility_pct),
                format_pct(r.privacy_pct),
                "" if r.best_c_utility is None else f"{r.best_c_utility:g}",
                "" if r.best_c_privacy is None else f"{r.best_c_privacy:g}",
                "" if r.rank_budget_ok is None else str(r.rank_budget_ok).lower(),
                weights,
                r.error or "",
            ]
        )
    return buf.getvalue()


def emit_report(report: ExperimentReport, out_dir: str, figures: bool = True) -> dict:
    """Write report.json / report.csv / report.txt (and figures) under out_dir.

    Returns a dict of artifact names to paths.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
        paths = {
            "json": os.path.join(out_dir, "report.json"),
            "csv": os.path.join(out_dir, "report.csv"),
            "table": os.path.join(out_dir, "report.txt"),
        }
        with open(paths["json"], "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
        with open(paths["csv"], "w", encoding="utf-8") as fh:
            fh.write(render_csv(report))
        with open(paths["table"], "w", encoding="utf-8") as fh:
            fh.write(render_table(report))
    except OSError as exc:
        raise DataError(f"cannot write report under {out_dir}: {exc}") from exc
    if figures:
        from .figures import render_report_figures

        paths.update(render_report_figures(report, os.path.join(out_dir, "figures")))
    return paths
