"""Figure rendering for CLI reports. Headless backend, writes PNG files."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_metric_bars(
    rows: Sequence[tuple[str, float]], out_path: str | Path, title: str
) -> Path:
    """Horizontal bars, one per (label, mean score in [0,1])."""
    out_path = Path(out_path)
    labels = [r[0] for r in rows]
    values = [r[1] for r in rows]
    fig, ax = plt.subplots(figsize=(7, max(2.0, 0.5 * len(rows) + 1)))
    ax.barh(range(len(rows)), values, color="#4878a8")
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(labels)
    ax.invert_yaxis()
    ax.set_xlim(0, 1)
    ax.set_xlabel("mean score")
    ax.set_title(title)
    ax.grid(axis="x", alpha=0.3)
    for i, v in enumerate(values):
        ax.text(v + 0.01, i, f"{v:.3f}", va="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def save_score_histogram(
    scores: Sequence[float], out_path: str | Path, title: str
) -> Path:
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(scores, bins=20, range=(0, 1), color="#6aa84f", edgecolor="white")
    ax.set_xlabel("per-sample score")
    ax.set_ylabel("count")
    ax.set_title(title)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def save_task_frequencies(
    frequencies: dict[str, float], out_path: str | Path, title: str
) -> Path:
    out_path = Path(out_path)
    names = list(frequencies)
    values = [frequencies[n] for n in names]
    fig, ax = plt.subplots(figsize=(max(5, 0.8 * len(names) + 2), 4))
    ax.bar(range(len(names)), values, color="#a85548")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("draw frequency")
    ax.set_title(title)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
