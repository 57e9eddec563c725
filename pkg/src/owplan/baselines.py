"""Hexagonal-lattice baselines: Hex (best lattice offset) and Hex+ (greedy gap filling)."""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass

import numpy as np
import shapely

from .errors import PlannerError, ValidationError
from .geometry import DEFAULT_CFG, GeomConfig, Layout, Point, Region, visibility_area_point
from .planner_mcc import EPS_COV, CoverageReport, Deployment, verify_coverage
from .pvgraph import plan_radius

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HexSearchConfig:
    offset_steps: int = 6
    rotations: tuple[float, ...] = (0.0,)
    candidate_pitch: float | None = None  # None: r / 4
    max_halvings: int = 4

    def __post_init__(self):
        if self.offset_steps < 4:
            raise ValidationError("offset_steps must be >= 4")
        if not self.rotations:
            raise ValidationError("need at least one rotation")

    def pitch(self, r: float) -> float:
        p = r / 4 if self.candidate_pitch is None else self.candidate_pitch
        if p > r / 2:
            raise ValidationError("candidate_pitch must be <= r/2")
        return p


def hex_lattice(L: Layout, r: float, offset: tuple[float, float] = (0.0, 0.0), rotation: float = 0.0) -> np.ndarray:
    """Centres of flat-topped hexagons of circumradius r (spacing sqrt(3) r) inside L."""
    a1 = np.array([1.5 * r, math.sqrt(3) / 2 * r])
    a2 = np.array([0.0, math.sqrt(3) * r])
    c, s = math.cos(rotation), math.sin(rotation)
    rot = np.array([[c, -s], [s, c]])
    a1, a2 = rot @ a1, rot @ a2
    x0, y0, x1, y1 = L.poly.bounds
    o = np.array([x0, y0]) + np.asarray(offset, float)
    span = max(x1 - x0, y1 - y0) * 1.5 + 2 * r
    # integer coordinates covering the bounding box generously
    B = np.column_stack([a1, a2])
    corners = np.array([[x0, y0], [x1, y0], [x0, y1], [x1, y1]]) - o
    ij = np.linalg.solve(B, corners.T).T
    lo = np.floor(ij.min(axis=0)) - 1
    hi = np.ceil(ij.max(axis=0)) + 1
    if np.any(hi - lo > 4 * span / r + 10):
        raise PlannerError("lattice too large")
    I, J = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    pts = o + I.ravel()[:, None] * a1 + J.ravel()[:, None] * a2
    inside = shapely.contains_xy(L.poly, pts[:, 0], pts[:, 1]) | shapely.intersects_xy(L.boundary, pts[:, 0], pts[:, 1])
    pts = pts[inside]
    order = np.lexsort((pts[:, 0], pts[:, 1]))
    return pts[order]


def _coverage(pts: np.ndarray, L: Layout, r: float, cfg: GeomConfig) -> Region:
    geoms = [visibility_area_point(p, L, r, cfg).geom for p in pts]
    return Region(shapely.union_all(geoms), cfg.eps_area) if geoms else Region()


def hex_deploy(L: Layout, r: float, cfg: HexSearchConfig = HexSearchConfig(),
               gcfg: GeomConfig = DEFAULT_CFG) -> tuple[Deployment, CoverageReport]:
    """Lattice offset (and rotation) minimising the exact outage area.

    Cells use the planners' margin radius, so lattice junctions fall inside
    the polygonal range disks and outage comes from walls alone.
    """
    if not r > 0:
        raise ValidationError("range must be positive")
    layout_region = Region.from_layout(L)
    best = None
    steps = cfg.offset_steps
    rc = plan_radius(r, gcfg)
    a1 = np.array([1.5 * rc, math.sqrt(3) / 2 * rc])
    a2 = np.array([0.0, math.sqrt(3) * rc])
    for rot in cfg.rotations:
        c, s = math.cos(rot), math.sin(rot)
        R = np.array([[c, -s], [s, c]])
        for u in range(steps):
            for v in range(steps):
                off = R @ (a1 * (u / steps) + a2 * (v / steps))
                pts = hex_lattice(L, rc, tuple(off), rot)
                out = layout_region.difference(_coverage(pts, L, r, gcfg), gcfg.eps_area)
                key = (round(out.area, 9), len(pts))
                if best is None or key < best[0]:
                    best = (key, pts, out, (float(off[0]), float(off[1])), rot)
    _, pts, out, off, rot = best
    d = Deployment([tuple(p) for p in pts], "hex", float(r), L.name)
    rep = CoverageReport(out.area <= EPS_COV, out.area, out, out.area / L.area)
    d.coverage = rep
    d.extra.update(offset=list(off), rotation=rot)
    return d, rep


def _candidate_grid(L: Layout, pitch: float, near: Region, r: float) -> np.ndarray:
    x0, y0, x1, y1 = L.poly.bounds
    xs = np.arange(x0 + pitch / 2, x1, pitch)
    ys = np.arange(y0 + pitch / 2, y1, pitch)
    X, Y = np.meshgrid(xs, ys)
    X, Y = X.ravel(), Y.ravel()
    keep = shapely.contains_xy(L.poly, X, Y)
    if not near.is_empty:
        zone = shapely.buffer(near.geom, r)
        keep &= shapely.contains_xy(zone, X, Y)
    return np.column_stack([X[keep], Y[keep]])


def hexplus_deploy(L: Layout, r: float, cfg: HexSearchConfig = HexSearchConfig(),
                   gcfg: GeomConfig = DEFAULT_CFG, base: tuple[Deployment, CoverageReport] | None = None) -> Deployment:
    """Hex plus APs chosen greedily from a grid, each removing the most outage area.

    Gains only shrink as outage is removed, so stale heap entries are
    re-evaluated lazily.  When no candidate helps, the grid pitch is halved.
    """
    d0, rep = base if base is not None else hex_deploy(L, r, cfg, gcfg)
    outage = rep.outage_region
    added: list[Point] = []
    pitch = cfg.pitch(r)
    halvings = 0
    gap_points = False
    while outage.area > EPS_COV:
        cands = _candidate_grid(L, pitch, outage, r)
        if gap_points:
            # a point inside a gap always sees part of it
            reps = np.array([[q.x, q.y] for q in (part.representative_point() for part in outage.parts)])
            cands = np.vstack([cands, reps]) if len(cands) else reps
        vis = {}
        heap = []
        for i, p in enumerate(cands):
            v = visibility_area_point(p, L, r, gcfg)
            g = v.intersect(outage, gcfg.eps_area).area
            if g > 0:
                vis[i] = v
                heap.append((-g, i))
        heapq.heapify(heap)
        progressed = False
        while heap and outage.area > EPS_COV:
            neg, i = heapq.heappop(heap)
            g = vis[i].intersect(outage, gcfg.eps_area).area
            if g <= 0:
                continue
            if heap and g < -heap[0][0] - 1e-12:
                heapq.heappush(heap, (-g, i))
                continue
            new = outage.difference(vis[i], gcfg.eps_area)
            if not new.area < outage.area:
                continue
            outage = new
            added.append(Point(float(cands[i][0]), float(cands[i][1])))
            progressed = True
        if outage.area <= EPS_COV:
            break
        if not gap_points:
            gap_points = True
            continue
        if not progressed or not heap:
            halvings += 1
            if halvings > cfg.max_halvings:
                raise PlannerError(f"Hex+ stalled with {outage.area:.3g} m2 outage after {cfg.max_halvings} pitch halvings")
            pitch /= 2
            log.info("Hex+: halving candidate pitch to %.4g", pitch)
    d = Deployment(list(d0.aps) + added, "hexplus", float(r), L.name)
    d.extra.update(hex_count=len(d0.aps), added=len(added), offset=d0.extra.get("offset"))
    d.coverage = verify_coverage(d, L, r, gcfg)
    return d
