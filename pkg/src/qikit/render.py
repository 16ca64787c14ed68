"""PTM heatmaps as SVG."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from qikit.pauli_algebra import Ptm, pauli_labels  # noqa: E402

logger = logging.getLogger(__name__)

COLORMAP = "RdBu"
CELL_INCHES = 0.45
SVG_HASH_SALT = "qikit"

_SVG_PARAMS = {
    "svg.hashsalt": SVG_HASH_SALT,
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
}


def _draw(ax, name: str, ptm: Ptm, annotate: bool):
    labels = pauli_labels(ptm.n)
    image = ax.imshow(
        ptm.matrix, cmap=COLORMAP, vmin=-1.0, vmax=1.0, interpolation="nearest"
    )
    ax.set_title(name)
    ax.set_xticks(range(ptm.dim), labels, rotation=90 if ptm.n > 1 else 0)
    ax.set_yticks(range(ptm.dim), labels)
    ax.set_xlabel("input Pauli")
    ax.set_ylabel("output Pauli")
    if annotate:
        for i, row in enumerate(ptm.matrix):
            for j, value in enumerate(row):
                # dark cells get white text
                color = "white" if abs(value) > 0.6 else "black"
                ax.text(j, i, f"{value:.2f}", ha="center", va="center", fontsize=7, color=color)
    return image


def render_instrument(named: Sequence[tuple[str, Ptm]], out_path: Path) -> Path:
    """One heatmap per named PTM, side by side, written to out_path as SVG."""
    if not named:
        raise ValueError("Nothing to render")
    out_path = Path(out_path)
    side = named[0][1].dim
    cols = min(len(named), 4)
    rows = math.ceil(len(named) / cols)
    panel = max(3.0, side * CELL_INCHES)
    with plt.rc_context(_SVG_PARAMS):
        fig, axes = plt.subplots(
            rows, cols, figsize=(panel * cols + 1.0, panel * rows), squeeze=False
        )
        image = None
        for ax, (name, ptm) in zip(axes.flat, named):
            image = _draw(ax, name, ptm, annotate=ptm.n <= 2)
        for ax in list(axes.flat)[len(named):]:
            ax.axis("off")
        fig.colorbar(
            image,
            ax=axes.ravel().tolist(),
            shrink=0.8,
            ticks=[-1.0, -0.5, 0.0, 0.5, 1.0],
            format="%.1f",
        )
        try:
            fig.savefig(out_path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    logger.info("Rendered %d heatmap(s) to %s", len(named), out_path)
    return out_path
