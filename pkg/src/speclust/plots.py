"""Matplotlib rendering for the report paths.

Figures are written next to the delimited output when the CLI is invoked
with --plot; everything uses the Agg backend so no display is needed.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .report import ExperimentRow  # noqa: E402

_FIGSIZE = (6.0, 4.0)
_DPI = 150


def render_curve(rows: list[tuple[float, float]], path: str) -> None:
    """Iteration count versus the Laplacian eigenvalue driving it."""
    xs = [x for x, _ in rows]
    ys = [fx for _, fx in rows]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(xs, ys, marker="o", markersize=3)
    ax.set_xlabel("eigenvalue x")
    ax.set_ylabel("iterations p")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_sweep(rows: list[ExperimentRow], path: str) -> None:
    """Normalized embedding time (and NMI when known) against p."""
    ps = [row.p for row in rows]
    norm = [row.embed_seconds_norm for row in rows]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(ps, norm, marker="o", markersize=4, label="time / time(p=0)")
    ax.set_xlabel("power iterations p")
    ax.set_ylabel("normalized embedding time")
    ax.grid(True, alpha=0.3)
    if any(row.nmi is not None for row in rows):
        ax2 = ax.twinx()
        ax2.plot(
            ps,
            [row.nmi for row in rows],
            marker="s",
            markersize=4,
            color="tab:orange",
            label="NMI",
        )
        ax2.set_ylabel("NMI")
        ax2.set_ylim(0.0, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_embedding(y, labels, path: str) -> None:
    """Scatter of the first two embedding coordinates colored by cluster."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    if y.shape[1] >= 2:
        ax.scatter(y[:, 0], y[:, 1], c=labels, s=12, cmap="tab10", alpha=0.8)
        ax.set_xlabel("embedding dim 1")
        ax.set_ylabel("embedding dim 2")
    else:
        ax.scatter(range(y.shape[0]), y[:, 0], c=labels, s=12, cmap="tab10", alpha=0.8)
        ax.set_xlabel("point index")
        ax.set_ylabel("embedding dim 1")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
