"""Connectivity tree construction, PDA updating and connected AP deployment.

A PDA (potential deployment area) is a region where an AP can go without
breaking coverage of its clique or line-of-sight backhaul to its tree
neighbours.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import shapely

from .errors import DisconnectedAreaError, InternalInvariantError, PlannerError
from .geometry import (DEFAULT_CFG, GeomConfig, Layout, Point, Region, connection_region,
                       representative_point, safe_intersection, segment_inside, visibility_polygon)
from .planner_mcc import Deployment
from .pvgraph import PVGraph

log = logging.getLogger(__name__)


@dataclass
class ConnectivityTree:
    nodes: list[Region]
    edges: list[tuple[int, int]] = field(default_factory=list)
    root: int | None = 0
    cliques: list[tuple[int, ...]] = field(default_factory=list)
    # collapsed PDAs (after AP placement) are represented by their point
    anchors: dict[int, Point] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.nodes)

    def neighbors(self, i: int) -> list[int]:
        out = [b for a, b in self.edges if a == i] + [a for a, b in self.edges if b == i]
        return sorted(out)

    def bfs(self, root: int) -> tuple[list[int], dict[int, int]]:
        order, parent = [root], {root: -1}
        q = deque([root])
        while q:
            u = q.popleft()
            for v in self.neighbors(u):
                if v not in parent:
                    parent[v] = u
                    order.append(v)
                    q.append(v)
        return order, parent

    def paths_to_leaves(self, root: int) -> list[list[int]]:
        order, parent = self.bfs(root)
        children = {u: [] for u in order}
        for v, p in parent.items():
            if p >= 0:
                children[p].append(v)
        paths = []
        for leaf in order:
            if children[leaf] or (leaf == root and len(order) > 1):
                continue
            path = [leaf]
            while parent[path[-1]] >= 0:
                path.append(parent[path[-1]])
            paths.append(path[::-1])
        return paths

    def copy(self) -> "ConnectivityTree":
        return ConnectivityTree(list(self.nodes), list(self.edges), self.root, list(self.cliques), dict(self.anchors))

    def to_json(self) -> dict:
        return {"pdas": [n.to_json() for n in self.nodes], "edges": [list(e) for e in self.edges],
                "root": self.root, "cliques": [list(c) for c in self.cliques]}


@dataclass(frozen=True)
class ConnectivityReport:
    connected: bool
    backhaul_edges: list[tuple[int, int]]

    def to_json(self) -> dict:
        return {"connected": self.connected, "backhaul_edges": [list(e) for e in self.backhaul_edges]}


class _CRCache:
    """Connection regions keyed by region identity (regions are immutable)."""

    def __init__(self, L: Layout, cfg: GeomConfig):
        self.L, self.cfg = L, cfg
        self._memo: dict[int, tuple[Region, Region]] = {}

    def __call__(self, A: Region, anchor: Point | None = None) -> Region:
        if anchor is not None:
            return visibility_polygon(anchor, self.L)
        hit = self._memo.get(id(A))
        if hit is not None and hit[0] is A:
            return hit[1]
        cr = connection_region(A, self.L, self.cfg)
        self._memo[id(A)] = (A, cr)
        return cr


def pda_update(t: ConnectivityTree, root: int, L: Layout, cfg: GeomConfig = DEFAULT_CFG,
               cr: _CRCache | None = None, on_empty: str = "raise") -> ConnectivityTree:
    """Shrink every PDA to the part seen from its predecessor on the root-to-leaf paths.

    Collapsed PDAs (anchors) are fixed and stop the propagation.  With
    ``on_empty="keep"`` a step that would empty a PDA leaves it unchanged;
    with ``"raise"`` it is treated as a broken invariant.
    """
    if not 0 <= root < len(t):
        raise PlannerError(f"unknown root {root}")
    cr = cr or _CRCache(L, cfg)
    out = t.copy()
    out.root = root
    done = set()
    for path in out.paths_to_leaves(root):
        for a, b in zip(path[:-1], path[1:]):
            if (a, b) in done:
                continue
            done.add((a, b))
            if b in out.anchors:
                break
            new = cr(out.nodes[a], out.anchors.get(a)).intersect(out.nodes[b], cfg.eps_area)
            if new.is_empty:
                if on_empty == "raise":
                    raise InternalInvariantError(f"PDA {b} became empty while updating from {a}")
                log.debug("PDA %d would become empty; kept", b)
                continue
            if new.area < out.nodes[b].area - cfg.eps_area:
                out.nodes[b] = new
    return out


def _first_clique(g: PVGraph) -> list[int]:
    """First maximal clique of the greedy clique clustering."""
    eps = g.cfg.eps_area
    order = np.lexsort((np.arange(len(g)), g.degree()))
    members, V = [], None
    ok = np.ones(len(g), dtype=bool)
    for p in order:
        if not ok[p]:
            continue
        cand = g.vis[p] if V is None else V.intersect(g.vis[p], eps)
        if cand.is_empty:
            continue
        members.append(int(p))
        V = cand
        ok &= g.adj[p]
    return members


def _overlap_flags(base: Region, regions: list[Region], idx: np.ndarray, eps: float) -> np.ndarray:
    """Vectorised ``area(base ∩ regions[i]) > eps`` for i in idx."""
    if base.is_empty or not len(idx):
        return np.zeros(len(idx), dtype=bool)
    geoms = np.array([regions[i].geom for i in idx], dtype=object)
    shapely.prepare(base.geom)
    hit = shapely.intersects(base.geom, geoms)
    out = np.zeros(len(idx), dtype=bool)
    if hit.any():
        out[hit] = shapely.area(safe_intersection(base.geom, geoms[hit])) > eps
    return out


def ctc(g: PVGraph, L: Layout | None = None, r: float | None = None) -> ConnectivityTree:
    """Build PDAs and the connectivity tree jointly, one greedy attachment per step."""
    L = L or g.layout
    cfg = g.cfg
    eps = cfg.eps_area
    if g.empty_nodes:
        raise PlannerError(f"triangle {g.empty_nodes[0]} has an empty visibility area; reduce R")
    cr = _CRCache(L, cfg)
    c = _first_clique(g)
    V = g.vis[c[0]]
    for p in c[1:]:
        V = V.intersect(g.vis[p], eps)
    tree = ConnectivityTree([V], [], 0, [tuple(c)])
    alive = np.ones(len(g), dtype=bool)
    alive[c] = False
    while alive.any():
        rem = np.nonzero(alive)[0]
        deg = g.adj[np.ix_(rem, rem)].sum(axis=1)
        order = rem[np.lexsort((rem, deg))]
        crs = [cr(A, tree.anchors.get(j)) for j, A in enumerate(tree.nodes)]
        reach = shapely.union_all([x.geom for x in crs])
        union_cr = Region(reach, eps)
        flags = _overlap_flags(union_cr, g.vis, order, eps)
        if not flags.any():
            raise DisconnectedAreaError(
                f"{len(order)} triangles (e.g. {int(order[0])}) cannot be reached by line-of-sight backhaul")
        k = int(order[np.argmax(flags)])
        # PDA whose connection region reaches the most remaining areas through the chosen triangle
        best, best_score = -1, -1
        cand_i = order[g.adj[k, order] | (order == k)]
        for j, crj in enumerate(crs):
            W = g.vis[k].intersect(crj, eps)
            if W.is_empty:
                continue
            score = int(_overlap_flags(W, g.vis, cand_i, eps).sum())
            if score > best_score:
                best, best_score = j, score
        C = best
        conn = np.zeros(len(g), dtype=bool)
        conn[order] = _overlap_flags(crs[C], g.vis, order, eps)
        members: list[int] = []
        Vc: Region | None = None
        ok = conn.copy()
        for p in order:
            if not ok[p]:
                continue
            base = crs[C] if Vc is None else Vc
            cand = base.intersect(g.vis[p], eps)
            if cand.is_empty:
                continue
            members.append(int(p))
            Vc = cand
            ok &= g.adj[p]
        if not members:
            raise InternalInvariantError("no clique could be attached to the selected PDA")
        new_id = len(tree.nodes)
        tree.nodes.append(Vc)
        tree.edges.append((C, new_id))
        tree.cliques.append(tuple(members))
        tree = pda_update(tree, new_id, L, cfg, cr)
        alive[members] = False
    return tree


def _candidate_points(R: Region, n_grid: int = 8) -> list[Point]:
    pts = [representative_point(R)]
    big = R.largest()
    q = big.representative_point()
    pts.append(Point(float(q.x), float(q.y)))
    x0, y0, x1, y1 = big.bounds
    xs = np.linspace(x0, x1, n_grid + 2)[1:-1]
    ys = np.linspace(y0, y1, n_grid + 2)[1:-1]
    X, Y = np.meshgrid(xs, ys)
    X, Y = X.ravel(), Y.ravel()
    inside = shapely.contains_xy(R.geom, X, Y)
    if inside.any():
        d = shapely.distance(R.geom.boundary, shapely.points(X[inside], Y[inside]))
        for i in np.argsort(-d, kind="stable"):
            pts.append(Point(float(X[inside][i]), float(Y[inside][i])))
    return pts


def deploy_from_tree(t: ConnectivityTree, L: Layout, r: float, cfg: GeomConfig = DEFAULT_CFG) -> Deployment:
    """Place one AP per PDA in tree-discovery order, collapsing each PDA to its AP."""
    cr = _CRCache(L, cfg)
    tree = t.copy()
    order, _ = tree.bfs(0)
    if len(order) != len(tree):
        raise InternalInvariantError("connectivity tree is not connected")
    aps: dict[int, Point] = {}
    for i in order:
        region = tree.nodes[i]
        nbrs = tree.neighbors(i)
        placed = [j for j in nbrs if j in aps]
        free = [j for j in nbrs if j not in aps]
        chosen = None
        for X in _candidate_points(region):
            if not all(segment_inside(X, aps[j], L) for j in placed):
                continue
            vis = visibility_polygon(X, L)
            if all(vis.overlaps(tree.nodes[j], cfg.eps_area) for j in free):
                chosen = X
                break
        if chosen is None:
            raise InternalInvariantError(f"no feasible AP position in PDA {i}")
        aps[i] = chosen
        tree.anchors[i] = chosen
        tree = pda_update(tree, i, L, cfg, cr, on_empty="keep")
    pts = [aps[i] for i in range(len(tree))]
    d = Deployment(pts, "ctc", float(r), L.name, list(range(len(pts))))
    d.extra["tree"] = t.to_json()
    return d


def verify_backhaul(d: Deployment, L: Layout) -> ConnectivityReport:
    """Connectivity of the unlimited-range line-of-sight graph between APs."""
    n = len(d.aps)
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if segment_inside(d.aps[i], d.aps[j], L)]
    if n <= 1:
        return ConnectivityReport(True, edges)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in edges:
        parent[find(i)] = find(j)
    return ConnectivityReport(len({find(i) for i in range(n)}) == 1, edges)


def plan_ctc(g: PVGraph) -> Deployment:
    tree = ctc(g)
    return deploy_from_tree(tree, g.layout, g.r, g.cfg)
