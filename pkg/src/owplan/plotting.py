"""Matplotlib renderings of layouts, deployments and CDFs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import PathPatch  # noqa: E402
from matplotlib.path import Path as MplPath  # noqa: E402

from .geometry import Layout, Region  # noqa: E402
from .partition import Partition  # noqa: E402
from .planner_mcc import Deployment  # noqa: E402

plt.rcParams["svg.hashsalt"] = "owplan"

COLORS = {"coverage": "#9ecae1", "outage": "#de2d26", "ap": "#08306b", "backhaul": "#31a354",
          "mesh": "#bdbdbd", "wall": "black", "pda": "#c994c7"}


def _region_patch(region: Region, **kw) -> PathPatch | None:
    verts, codes = [], []
    for poly in region.parts:
        for ring in [poly.exterior, *poly.interiors]:
            xy = np.asarray(ring.coords)
            verts.extend(xy)
            codes.extend([MplPath.MOVETO] + [MplPath.LINETO] * (len(xy) - 2) + [MplPath.CLOSEPOLY])
    if not verts:
        return None
    return PathPatch(MplPath(np.asarray(verts), codes), **kw)


def _save(fig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = path.suffix.lstrip(".").lower() or "svg"
    meta = {"Date": None} if fmt in ("svg", "pdf") else {"Software": None}
    fig.savefig(path, format=fmt, metadata=meta, bbox_inches="tight", dpi=150)
    plt.close(fig)


def draw_layout(ax, L: Layout, part: Partition | None = None) -> None:
    if part is not None:
        P = np.asarray(part.points)
        ax.triplot(P[:, 0], P[:, 1], np.asarray(part.tris), color=COLORS["mesh"], lw=0.4)
    xy = np.vstack([L.arr, L.arr[:1]])
    ax.plot(xy[:, 0], xy[:, 1], color=COLORS["wall"], lw=1.2)
    ax.set_aspect("equal")


def render_deployment(path, L: Layout, d: Deployment | None = None, *, part: Partition | None = None,
                      coverage: Region | None = None, outage: Region | None = None,
                      backhaul: list[tuple[int, int]] | None = None, pdas: list[Region] | None = None,
                      title: str | None = None) -> None:
    """Layout outline, optional mesh, coverage, outage, PDAs, AP markers and backhaul links."""
    fig, ax = plt.subplots(figsize=(6, 6))
    for reg, key, alpha in ((coverage, "coverage", 0.5), (outage, "outage", 0.8)):
        if reg is not None and not reg.is_empty:
            patch = _region_patch(reg, facecolor=COLORS[key], edgecolor="none", alpha=alpha, label=key)
            if patch is not None:
                ax.add_patch(patch)
    for i, reg in enumerate(pdas or []):
        patch = _region_patch(reg, facecolor=COLORS["pda"], edgecolor="#7a0177", alpha=0.35, lw=0.5,
                              label="PDA" if i == 0 else None)
        if patch is not None:
            ax.add_patch(patch)
    draw_layout(ax, L, part)
    if d is not None and len(d):
        xy = d.xy
        for k, (i, j) in enumerate(backhaul or []):
            ax.plot(xy[[i, j], 0], xy[[i, j], 1], color=COLORS["backhaul"], lw=1.0, ls="--",
                    label="backhaul" if k == 0 else None)
        ax.scatter(xy[:, 0], xy[:, 1], marker="^", s=40, color=COLORS["ap"], zorder=5, label=f"AP ({len(d)})")
    ax.set_title(title or (f"{d.method} r={d.r:g}" if d is not None else L.name))
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="upper right", fontsize=7)
    _save(fig, path)


def render_cdfs(path, series: dict[str, np.ndarray], xlabel: str, title: str = "") -> None:
    """Empirical CDF curves, one per labelled sample vector."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label in sorted(series):
        v = np.sort(np.asarray(series[label], float))
        if len(v):
            ax.step(v, np.arange(1, len(v) + 1) / len(v), where="post", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("CDF")
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    if series:
        ax.legend(fontsize=8)
    _save(fig, path)
