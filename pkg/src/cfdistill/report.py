"""Metrics report: line records, a table on standard output, and figures.

The report is one record per (metric, direction) plus an overall row per
metric, keyed by the six direction short names. Figures are rendered to PNG
files in the same directory as the delimited report.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .dataio import write_records
from .types import ALL_DIRECTIONS

DIRECTION_COLUMNS = tuple(d.short_name for d in ALL_DIRECTIONS)

OVERALL = "overall"


@dataclass(frozen=True)
class MetricRecord:
    metric: str
    direction: str   # a short name or "overall"
    value: float | None
    count: int

    def to_record(self) -> dict:
        return {
            "metric": self.metric,
            "direction": self.direction,
            "value": None if self.value is None else round(self.value, 6),
            "count": self.count,
        }


def write_report(records: Sequence[MetricRecord], path: str | Path) -> None:
    write_records((r.to_record() for r in records), path)


def format_table(records: Sequence[MetricRecord]) -> str:
    """Human-readable table: one row per metric, one column per direction plus overall."""
    metrics: dict[str, dict[str, MetricRecord]] = {}
    for record in records:
        metrics.setdefault(record.metric, {})[record.direction] = record
    columns = [c for c in DIRECTION_COLUMNS if any(c in per_dir for per_dir in metrics.values())]
    columns.append(OVERALL)
    header = ["metric"] + list(columns)
    rows = [header]
    for metric, per_direction in metrics.items():
        row = [metric]
        for col in columns:
            record = per_direction.get(col)
            row.append("-" if record is None or record.value is None else f"{record.value:.4f}")
        rows.append(row)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for idx, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * widths[i] for i in range(len(header))))
    return "\n".join(lines)


def render_figures(records: Sequence[MetricRecord], out_dir: str | Path) -> list[Path]:
    """One bar chart per metric (per-direction values plus the overall bar)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics: dict[str, dict[str, MetricRecord]] = {}
    for record in records:
        metrics.setdefault(record.metric, {})[record.direction] = record

    written: list[Path] = []
    for metric, per_direction in metrics.items():
        labels = [c for c in (*DIRECTION_COLUMNS, OVERALL) if c in per_direction]
        values = [per_direction[c].value for c in labels]
        pairs = [(lab, val) for lab, val in zip(labels, values) if val is not None]
        if not pairs:
            continue
        labels = [p[0] for p in pairs]
        values = [p[1] for p in pairs]
        fig, ax = plt.subplots(figsize=(6.0, 3.2))
        bars = ax.bar(labels, values, color=["#888888" if lab == OVERALL else "#4878a8" for lab in labels])
        ax.set_ylabel(metric)
        ax.set_title(f"{metric} by perturbation direction")
        ax.bar_label(bars, fmt="%.3f", fontsize=8)
        fig.tight_layout()
        path = out_dir / f"fig_{metric.replace('-', '_')}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
