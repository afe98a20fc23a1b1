"""SVG figure emitters for benchmark and analysis outputs."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .geometry import Inducer


def _match_shade(m: int) -> tuple:
    """Darker strokes for better-sampled reconstructions."""
    t = min(math.log10(m + 1) / 4.0, 1.0)
    return plt.cm.Blues(0.35 + 0.6 * t)


def _draw_inducer(ax, ind: Inducer, color: str):
    x, y = ind.position.x, ind.position.y
    ax.plot([x], [y], marker="o", color=color, markersize=5, zorder=5)
    ax.annotate("", xytext=(x, y),
                xy=(x + math.cos(ind.theta), y + math.sin(ind.theta)),
                arrowprops=dict(arrowstyle="->", color=color, lw=1.5))


def save_reconstruction(path, i1: Inducer, i2: Inducer, curve, m: int,
                        euler=None, gt=None) -> None:
    """Draw a reconstruction: inducers, the mean curve shaded by its
    sample count, and optional baseline / ground-truth overlays."""
    fig, ax = plt.subplots(figsize=(5, 5))
    pts = np.asarray(getattr(curve, "points", curve), dtype=float)
    if gt is not None:
        gpts = np.asarray(getattr(gt, "points", gt), dtype=float)
        ax.plot(gpts[:, 0], gpts[:, 1], color="0.75", lw=3, label="ground truth")
    if euler is not None:
        epts = np.asarray(getattr(euler, "points", euler), dtype=float)
        ax.plot(epts[:, 0], epts[:, 1], color="darkorange", lw=1.5,
                linestyle="--", label="euler spiral")
    ax.plot(pts[:, 0], pts[:, 1], color=_match_shade(m), lw=2,
            label=f"mean curve (m={m})")
    _draw_inducer(ax, i1, "black")
    _draw_inducer(ax, i2, "black")
    ax.set_aspect("equal")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("gap reconstruction")
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)


def save_arc_curves(result, path, title: str = "accuracy vs threshold") -> None:
    """One accuracy curve per method, annotated with its area score."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for name, arc in result.arc.items():
        ax.plot(result.thresholds, arc, lw=2,
                label=f"{name} (AUC={result.auc[name]:.3f})")
    ax.set_xlabel("error threshold")
    ax.set_ylabel("fraction under threshold")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title(title)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)


def save_scale_heatmap(path, a1_values, a2_values, grid, label: str) -> None:
    """Heatmap of a per-configuration scalar over chord-frame angles."""
    fig, ax = plt.subplots(figsize=(5, 4))
    mesh = ax.pcolormesh(np.asarray(a1_values), np.asarray(a2_values),
                         np.asarray(grid, dtype=float).T,
                         shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=label)
    ax.set_xlabel("first tangent angle from chord")
    ax.set_ylabel("second tangent angle from chord")
    ax.set_title(label)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
