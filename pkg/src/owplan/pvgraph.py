"""Partition-based visibility graph and clique visibility areas."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import shapely
from scipy import sparse

from .errors import DomainError
from .geometry import DEFAULT_CFG, GeomConfig, Layout, Region, safe_intersection, visibility_area_point
from .partition import Partition, Triangle

log = logging.getLogger(__name__)


def plan_radius(r: float, cfg: GeomConfig = DEFAULT_CFG) -> float:
    """Range used inside the planners.

    Shrinking by cos(pi/k) makes the true disk of this radius fit in the
    inscribed k-gon of radius ``r`` that coverage verification uses, so a
    planned deployment verifies without relying on ``eps_cov``.
    """
    return r * math.cos(math.pi / cfg.circle_segments)


def visibility_area_polygon(p: Triangle, L: Layout, r: float, cfg: GeomConfig = DEFAULT_CFG) -> Region:
    """Points that see all three corners of ``p`` within range ``r``."""
    out = None
    for X in p.corners:
        v = visibility_area_point(X, L, r, cfg)
        out = v if out is None else out.intersect(v, cfg.eps_area)
        if out.is_empty:
            break
    return out


@dataclass
class PVGraph:
    part: Partition
    layout: Layout
    r: float
    vis: list[Region]
    adj: np.ndarray
    cfg: GeomConfig = DEFAULT_CFG
    r_plan: float = 0.0

    @property
    def nodes(self) -> list[int]:
        return list(range(len(self.vis)))

    def __len__(self) -> int:
        return len(self.vis)

    @property
    def empty_nodes(self) -> list[int]:
        return [i for i, v in enumerate(self.vis) if v.is_empty]

    def degree(self) -> np.ndarray:
        return self.adj.sum(axis=1)

    def neighbors(self, i: int) -> list[int]:
        return [int(j) for j in np.nonzero(self.adj[i])[0]]

    def to_adjacency_text(self) -> str:
        return "".join(" ".join(map(str, [i, *self.neighbors(i)])) + "\n" for i in self.nodes)


def _deep_grid_hits(regions: list[Region], live: list[int], pitch: float, clear: float):
    """Sparse incidence of regions and grid points lying at least ``clear`` inside them."""
    rows, cols = [], []
    for r_i, i in enumerate(live):
        g = regions[i].geom
        x0, y0, x1, y1 = g.bounds
        gx = np.arange(math.ceil(x0 / pitch), math.floor(x1 / pitch) + 1)
        gy = np.arange(math.ceil(y0 / pitch), math.floor(y1 / pitch) + 1)
        if not len(gx) or not len(gy):
            continue
        X, Y = np.meshgrid(gx, gy)
        X, Y = X.ravel(), Y.ravel()
        inside = shapely.contains_xy(g, X * pitch, Y * pitch)
        if not inside.any():
            continue
        X, Y = X[inside], Y[inside]
        d = shapely.distance(g.boundary, shapely.points(X * pitch, Y * pitch))
        ok = d >= clear
        rows.append(np.full(int(ok.sum()), r_i))
        cols.append(X[ok].astype(np.int64) * 10_000_019 + Y[ok].astype(np.int64))
    return rows, cols


def overlap_matrix(regions: list[Region], eps_area: float, pitch: float | None = None) -> np.ndarray:
    """Symmetric boolean matrix of pairwise overlaps (area > eps_area).

    Pairs sharing a grid point that lies deep inside both regions overlap in
    a disk of area above ``eps_area`` and skip the clipping; every other
    bounding-box candidate is clipped exactly.
    """
    n = len(regions)
    adj = np.zeros((n, n), dtype=bool)
    live = [i for i, g in enumerate(regions) if not g.is_empty]
    if len(live) < 2:
        return adj
    live_arr = np.array(live)
    geoms = np.array([regions[i].geom for i in live], dtype=object)
    tree = shapely.STRtree(geoms)
    a, b = tree.query(geoms)
    keep = a < b
    a, b = a[keep], b[keep]
    if not len(a):
        return adj
    sure = np.zeros(len(a), dtype=bool)
    if pitch is None:
        pitch = math.sqrt(np.median(shapely.area(geoms))) / 12
    clear = 2.0 * math.sqrt(eps_area / math.pi)
    if pitch > clear:
        rows, cols = _deep_grid_hits(regions, live, pitch, clear)
        if rows:
            rows = np.concatenate(rows)
            _, cols = np.unique(np.concatenate(cols), return_inverse=True)
            inc = sparse.csr_matrix((np.ones(len(rows), dtype=np.int32), (rows, cols.ravel())),
                                    shape=(len(live), int(cols.max()) + 1))
            shared = (inc @ inc.T).tocsr()
            sure = np.asarray(shared[a, b]).ravel() > 0
    rest = np.nonzero(~sure)[0]
    shapely.prepare(geoms)
    rest = rest[shapely.intersects(geoms[a[rest]], geoms[b[rest]])]
    area = shapely.area(safe_intersection(geoms[a[rest]], geoms[b[rest]]))
    hit = sure.copy()
    hit[rest] = area > eps_area
    ia, ib = live_arr[a[hit]], live_arr[b[hit]]
    adj[ia, ib] = True
    adj[ib, ia] = True
    return adj


def build_pv_graph(part: Partition, L: Layout, r: float, cfg: GeomConfig = DEFAULT_CFG,
                   margin: bool = True) -> PVGraph:
    """Visibility area per triangle plus the overlap adjacency.

    With ``margin`` the areas are built at :func:`plan_radius` instead of
    ``r``.  Nodes with empty visibility are kept and logged; the planners
    reject them.
    """
    if not r > 0:
        raise DomainError("range must be positive")
    if part.R_used > math.sqrt(3) * r * (1 + 1e-12):
        log.warning("partition side bound %.4g exceeds sqrt(3)*r; some visibility areas may be empty", part.R_used)
    rp = plan_radius(r, cfg) if margin else r
    vcache: dict[int, Region] = {}

    def vert_vis(i: int) -> Region:
        v = vcache.get(i)
        if v is None:
            v = vcache[i] = visibility_area_point(part.points[i], L, rp, cfg)
        return v

    vis = []
    for t in part.tris:
        reg = vert_vis(int(t[0]))
        for i in t[1:]:
            if reg.is_empty:
                break
            reg = reg.intersect(vert_vis(int(i)), cfg.eps_area)
        vis.append(reg)
    adj = overlap_matrix(vis, cfg.eps_area)
    g = PVGraph(part, L, float(r), vis, adj, cfg, rp)
    if g.empty_nodes:
        log.warning("%d triangles have empty visibility areas", len(g.empty_nodes))
    return g


def clique_visibility(c: Iterable[int], g: PVGraph) -> Region:
    """Intersection of the members' visibility areas."""
    members = sorted(set(int(i) for i in c))
    if not members:
        raise DomainError("empty clique")
    for i in members:
        if not 0 <= i < len(g.vis):
            raise DomainError(f"unknown triangle id {i}")
    out = g.vis[members[0]]
    for i in members[1:]:
        out = out.intersect(g.vis[i], g.cfg.eps_area)
        if out.is_empty:
            break
    return out
