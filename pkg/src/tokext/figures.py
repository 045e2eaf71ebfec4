"""Render checkpoint-series figures next to the series CSV.

One figure per metric: a row of panels, one per target unit, each plotting
metric value against training step with one line per difficulty (easy in
orange, hard in blue). Purely a display of the series data; the CSV remains
the canonical output.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .report import SeriesPoint

UNIT_ORDER = ["token", "character", "word"]
DIFFICULTY_COLORS = {"easy": "tab:orange", "hard": "tab:blue"}


def render_series_figures(
    points: Sequence[SeriesPoint], out_stem: str | Path, dpi: int = 150
) -> list[Path]:
    """Write <out_stem>_<metric>.png for every metric present; returns the paths."""
    out_stem = Path(out_stem)
    metrics = sorted({p.metric for p in points})
    written: list[Path] = []
    for metric in metrics:
        metric_points = [p for p in points if p.metric == metric]
        units = [u for u in UNIT_ORDER if any(p.unit == u for p in metric_points)]
        units += sorted({p.unit for p in metric_points} - set(units))
        if not units:
            continue
        fig, axes = plt.subplots(
            1, len(units), figsize=(4.0 * len(units), 3.2), squeeze=False, sharey=True
        )
        for ax, unit in zip(axes[0], units):
            for difficulty in ("easy", "hard"):
                series = sorted(
                    (p for p in metric_points if p.unit == unit and p.difficulty == difficulty),
                    key=lambda p: p.training_step,
                )
                if not series:
                    continue
                ax.plot(
                    [p.training_step for p in series],
                    [p.value for p in series],
                    marker="o",
                    color=DIFFICULTY_COLORS.get(difficulty),
                    label=difficulty,
                )
            ax.set_title(f"{unit} level")
            ax.set_xlabel("training step")
            ax.grid(True, alpha=0.3)
        axes[0][0].set_ylabel(metric)
        axes[0][0].legend()
        fig.suptitle(metric)
        fig.tight_layout()
        path = out_stem.parent / f"{out_stem.name}_{metric}.png"
        fig.savefig(path, dpi=dpi)
        plt.close(fig)
        written.append(path)
    return written
