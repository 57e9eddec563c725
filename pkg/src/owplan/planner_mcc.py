"""Maximal clique clustering, AP placement and coverage verification."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import shapely

from .errors import PlannerError
from .geometry import (DEFAULT_CFG, GeomConfig, Layout, Point, Region, in_layout,
                       representative_point, visibility_area_point)
from .pvgraph import PVGraph

log = logging.getLogger(__name__)

EPS_COV = 1e-4
METHODS = ("mcc", "ctc", "hex", "hexplus", "manual")


@dataclass(frozen=True)
class Clique:
    members: tuple[int, ...]
    vis: Region

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class CoverageReport:
    covered: bool
    outage_area: float
    outage_region: Region
    outage_fraction: float

    def to_json(self) -> dict:
        return {"covered": self.covered, "outage_area": self.outage_area,
                "outage_fraction": self.outage_fraction}


@dataclass
class Deployment:
    aps: list[Point]
    method: str
    r: float
    layout_name: str = ""
    sources: list[int | None] = field(default_factory=list)
    coverage: CoverageReport | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        self.aps = [Point(float(p[0]), float(p[1])) for p in self.aps]
        if not self.sources:
            self.sources = [None] * len(self.aps)

    def __len__(self) -> int:
        return len(self.aps)

    @property
    def xy(self) -> np.ndarray:
        return np.array(self.aps, dtype=float).reshape(-1, 2)


def mcc(g: PVGraph) -> list[Clique]:
    """Greedy clique cover with a non-empty common visibility guard.

    Each pass sorts the remaining nodes by ascending degree in the remaining
    graph (ties by id) and scans them once, keeping a node when it is
    adjacent to everything kept so far and the running intersection of
    visibility areas stays non-empty.
    """
    empty = g.empty_nodes
    if empty:
        raise PlannerError(f"triangle {empty[0]} has an empty visibility area; reduce R")
    eps = g.cfg.eps_area
    alive = np.ones(len(g), dtype=bool)
    adj = g.adj
    out: list[Clique] = []
    while alive.any():
        rem = np.nonzero(alive)[0]
        deg = adj[np.ix_(rem, rem)].sum(axis=1)
        order = rem[np.lexsort((rem, deg))]
        members: list[int] = []
        ok = np.ones(len(g), dtype=bool)  # adjacent to every member so far
        V: Region | None = None
        for p in order:
            if not ok[p]:
                continue
            cand = g.vis[p] if V is None else V.intersect(g.vis[p], eps)
            if cand.is_empty:
                continue
            members.append(int(p))
            V = cand
            ok &= adj[p]
        alive[members] = False
        out.append(Clique(tuple(members), V))
    return out


def place_aps(cliques: list[Clique], L: Layout, r: float, method: str = "mcc") -> Deployment:
    """One AP at the representative point of each clique's visibility area."""
    aps, src = [], []
    for j, c in enumerate(cliques):
        if c.vis is None or c.vis.is_empty:
            raise PlannerError(f"clique {j} has an empty visibility area")
        p = representative_point(c.vis)
        if not in_layout(p, L, tol=1e-7):
            raise PlannerError(f"AP for clique {j} fell outside the layout")
        aps.append(p)
        src.append(j)
    return Deployment(aps, method, float(r), L.name, src)


def coverage_union(aps, L: Layout, r: float, cfg: GeomConfig = DEFAULT_CFG) -> Region:
    geoms = [visibility_area_point(p, L, r, cfg).geom for p in aps]
    if not geoms:
        return Region()
    return Region(shapely.union_all(geoms), cfg.eps_area)


def verify_coverage(d: Deployment, L: Layout, r: float | None = None, cfg: GeomConfig = DEFAULT_CFG,
                    eps_cov: float = EPS_COV) -> CoverageReport:
    """Outage = layout minus the union of AP visibility areas."""
    r = d.r if r is None else r
    cov = coverage_union(d.aps, L, r, cfg)
    out = Region.from_layout(L).difference(cov, cfg.eps_area)
    a = out.area
    return CoverageReport(a <= eps_cov, a, out, a / L.area)


def plan_mcc(g: PVGraph) -> Deployment:
    cl = mcc(g)
    d = place_aps(cl, g.layout, g.r)
    d.extra["cliques"] = [list(c.members) for c in cl]
    return d
