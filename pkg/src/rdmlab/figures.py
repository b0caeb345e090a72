"""Figure rendering for the report paths: each helper writes one PNG next to
the delimited output it illustrates."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .rd_solver import RDCurve
from .task_appropriateness import DepthSweepResult
from .toy_lab import ToyDataset, ToyReport


def render_rd_curve(curve: RDCurve, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    d = [p.distortion for p in curve.points]
    r = [p.rate for p in curve.points]
    ax.plot(d, r, marker=".", linewidth=1.2)
    ax.set_xlabel("distortion")
    ax.set_ylabel("rate (bits)")
    ax.set_title(curve.tag or "rate-distortion curve")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_toy_scatter(ds: ToyDataset, report: ToyReport, path: str | Path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    show = min(len(ds.labels), 4000)
    for ax, points, quantizer, title in (
        (axes[0], ds.inputs[:show], report.input_quantizer, "inputs"),
        (axes[1], ds.features[:show], report.feature_quantizer, "features"),
    ):
        labels = ds.labels[:show]
        for cls, marker in ((0, "s"), (1, "o")):
            sel = labels == cls
            ax.scatter(points[sel, 0], points[sel, 1], s=4, marker=marker, alpha=0.4)
        reps = quantizer.representatives
        ax.scatter(reps[:, 0], reps[:, 1], s=120, marker="x", color="black")
        ax.set_title(title)
        ax.set_xlabel("first coordinate")
        ax.set_ylabel("second coordinate")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_rho_bars(result: DepthSweepResult, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    x = np.arange(len(result.names))
    ax.bar(x, result.scores)
    ax.set_xticks(x)
    ax.set_xticklabels(result.names, rotation=30, ha="right")
    ax.set_yscale("log")
    ax.set_ylabel("task appropriateness")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
