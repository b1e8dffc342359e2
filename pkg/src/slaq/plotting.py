"""Rendering of report datasets to PNG files.

Every report CSV the CLI writes has a sibling renderer here; plots are
deliberately plain (one axes, labeled lines) and are written next to
the delimited output.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def line_plot(
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    path: str,
    title: str = "",
) -> str:
    """One PNG with a line per series; gaps (None) are skipped."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, ys in series.items():
        pts = [(a, b) for a, b in zip(x, ys) if b is not None]
        if not pts:
            continue
        xs, vals = zip(*pts)
        ax.plot(xs, vals, marker="o", markersize=3, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def bar_plot(labels, values, xlabel, ylabel, path, title=""):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([str(x) for x in labels], values)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
