"""matplotlib renderings of occupancy grids and density trends.

Uses the object-oriented ``Figure`` API (no pyplot state), and strips the
PNG metadata so that repeated runs write identical bytes.
"""

from __future__ import annotations

from typing import Optional, Sequence

from matplotlib.figure import Figure

from .plot import PlotGrid, TrendReport

_PNG_META = {"Software": None}


def new_figure(width: float = 5.0, height: Optional[float] = None, nrows: int = 1,
               ncols: int = 1):
    height = width if height is None else height
    fig = Figure(figsize=(width, height), dpi=100)
    axes = fig.subplots(nrows, ncols, squeeze=False)
    return fig, axes


def draw_grid(ax, grid: PlotGrid, title: Optional[str] = None):
    """Occupied cells in black on the unit square, y pointing up."""
    ax.imshow(grid.bitmap.T, origin="lower", extent=(0, 1, 0, 1),
              cmap="gray_r", vmin=0, vmax=1, interpolation="nearest")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.tick_params(labelsize=7)
    if title:
        ax.set_title(title, fontsize=9)


def grid_figure(grid: PlotGrid, title: Optional[str] = None) -> Figure:
    fig, axes = new_figure(5.0)
    draw_grid(axes[0][0], grid, title or f"k={grid.k}, m={grid.m}")
    fig.tight_layout()
    return fig


def panel_figure(grids: Sequence[PlotGrid], titles: Sequence[str], ncols: int = 4) -> Figure:
    nrows = (len(grids) + ncols - 1) // ncols
    fig, axes = new_figure(3.0 * ncols, 3.2 * nrows, nrows, ncols)
    for idx, ax in enumerate(ax for row in axes for ax in row):
        if idx < len(grids):
            draw_grid(ax, grids[idx], titles[idx])
        else:
            ax.axis("off")
    fig.tight_layout()
    return fig


def trend_figure(trend: TrendReport, title: Optional[str] = None) -> Figure:
    fig, axes = new_figure(5.0, 3.5)
    ax = axes[0][0]
    ax.plot(trend.ks, trend.alpha_fixed, "o-", label=f"m = {trend.m}")
    ax.plot(trend.ks, trend.alpha_refined, "s--", label="m = k // 2")
    ax.set_xlabel("point level k")
    ax.set_ylabel("occupied fraction")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    return fig


def save_figure(fig: Figure, path) -> None:
    fig.savefig(path, metadata=_PNG_META if str(path).endswith(".png") else None)
