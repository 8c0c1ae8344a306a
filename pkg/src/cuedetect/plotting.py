"""Report figures written next to the CSV/text metric files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evaluation import MetricsReport  # noqa: E402

_STYLE = {
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def metric_bars(rows: list[tuple[str, MetricsReport]], path: str | Path,
                metrics=("recall", "precision", "fmeasure")) -> Path:
    """Grouped bars of selected metrics, one group per row."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(max(4.0, 0.7 * len(rows) + 2), 3.2))
        x = np.arange(len(rows))
        width = 0.8 / len(metrics)
        for i, key in enumerate(metrics):
            ax.bar(x + (i - (len(metrics) - 1) / 2) * width,
                   [getattr(rep, key) for _, rep in rows], width, label=key)
        ax.set_xticks(x)
        ax.set_xticklabels([name for name, _ in rows], rotation=30, ha="right")
        ax.set_ylim(0, 1.05)
        ax.legend(ncol=len(metrics), fontsize=8, frameon=False)
        return _save(fig, path)


def frame_curve(indices, fmeasure, path: str | Path, reinit_frames=(), title: str = "") -> Path:
    """Per-frame F-measure with reinitialization instants marked."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 2.6))
        ax.plot(indices, fmeasure, lw=1.0, color="tab:blue")
        for k, frame in enumerate(reinit_frames):
            ax.axvline(frame, color="tab:red", lw=0.8, ls="--", label="reinit" if k == 0 else None)
        ax.set_xlabel("frame")
        ax.set_ylabel("F-measure")
        ax.set_ylim(0, 1.05)
        if title:
            ax.set_title(title)
        if reinit_frames:
            ax.legend(frameon=False, fontsize=8)
        return _save(fig, path)


def stage_timings(records: list[dict], path: str | Path) -> Path:
    """Stacked per-stage processing time of every frame."""
    stages = ("background", "features_learning", "labeling")
    frames = [r["frame"] for r in records]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 2.6))
        ax.stackplot(frames, *[[r["timings"][s] for r in records] for s in stages], labels=stages)
        ax.set_xlabel("frame")
        ax.set_ylabel("seconds")
        ax.legend(loc="upper left", frameon=False, fontsize=8)
        return _save(fig, path)
