"""Figures written next to the structured outputs of a run."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_PNG_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_group_distances(distances: Mapping[str, float], path) -> Path:
    """Horizontal bars of the distance of each selected group, by activity name."""
    names = sorted(distances)
    fig, ax = plt.subplots(figsize=(6, 0.4 * len(names) + 1.2))
    ax.barh(names, [distances[n] for n in names], color="#4c72b0")
    ax.invert_yaxis()
    ax.set_xlabel("group distance")
    ax.axvline(1.0, color="grey", lw=0.8, ls="--")
    fig.tight_layout()
    return _save(fig, path)


def plot_class_distances(classes: list[str], matrix: list[list[float]], groups: Mapping[str, str], path) -> Path:
    """Heatmap of positional class distances, classes ordered by activity."""
    order = sorted(range(len(classes)), key=lambda i: (groups.get(classes[i], ""), classes[i]))
    labels = [classes[i] for i in order]
    data = [[matrix[i][j] for j in order] for i in order]
    size = 0.35 * len(labels) + 2
    fig, ax = plt.subplots(figsize=(size, size))
    im = ax.imshow(data, cmap="viridis")
    ax.set_xticks(range(len(labels)), labels, rotation=90)
    ax.set_yticks(range(len(labels)), labels)
    fig.colorbar(im, ax=ax, shrink=0.8, label="mean positional distance")
    fig.tight_layout()
    return _save(fig, path)
