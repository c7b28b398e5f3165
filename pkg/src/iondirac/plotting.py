"""Static SVG figures."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .serialize import atomic_write_text  # noqa: E402

plt.rcParams["svg.hashsalt"] = "iondirac"
plt.rcParams["svg.fonttype"] = "path"


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    yerr: np.ndarray | None = None
    markers: bool = False
    invert: bool = False
    fill: bool = False


@dataclass
class PlotStyle:
    xlabel: str
    ylabel: str
    title: str | None = None
    panel_titles: list = field(default_factory=list)
    width: float = 6.0
    height: float = 4.0


def _draw(ax, s: Series):
    y = -np.asarray(s.y) if s.invert else np.asarray(s.y)
    if s.fill:
        ax.fill_between(s.x, 0, y, alpha=0.35, label=s.label)
    elif s.yerr is not None:
        ax.errorbar(s.x, y, yerr=s.yerr, fmt="o", ms=3, capsize=2, label=s.label)
    elif s.markers:
        ax.plot(s.x, y, "o", ms=3, label=s.label)
    else:
        ax.plot(s.x, y, "-", lw=1.2, label=s.label)


def emit_plot(series, style: PlotStyle, path) -> Path:
    """Render series to a self-contained SVG.

    ``series`` is a list of :class:`Series` drawn on one axes, or a list of
    such lists drawn as side-by-side panels.
    """
    if not series:
        raise ValueError("nothing to plot: series is empty")
    panels = series if isinstance(series[0], (list, tuple)) else [series]
    if any(len(p) == 0 for p in panels):
        raise ValueError("nothing to plot: a panel is empty")
    fig, axes = plt.subplots(1, len(panels), figsize=(style.width * len(panels) ** 0.6, style.height), squeeze=False, sharey=len(panels) > 1)
    for i, (ax, panel) in enumerate(zip(axes[0], panels)):
        for s in panel:
            _draw(ax, s)
        ax.set_xlabel(style.xlabel)
        if i == 0:
            ax.set_ylabel(style.ylabel)
        if i < len(style.panel_titles):
            ax.set_title(style.panel_titles[i])
        ax.legend(fontsize=7, frameon=False)
    if style.title:
        fig.suptitle(style.title)
    fig.tight_layout()
    buf = io.StringIO()
    try:
        fig.savefig(buf, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    try:
        return atomic_write_text(path, buf.getvalue())
    except OSError as exc:
        raise OSError(f"could not write plot to {path}: {exc}") from exc
