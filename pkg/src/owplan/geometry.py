"""Planar primitives: layouts, regions, line-of-sight and visibility.

Layouts are simple CCW polygons in meters.  Regions are unions of
interior-disjoint polygons backed by shapely; every boolean operation
normalises its output so that numerical slivers below ``eps_area`` vanish.

Line-of-sight uses closed-set semantics: a segment that grazes a wall or
passes through a reflex corner while staying in the closure of the layout
counts as visible.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Polygon
from shapely.geometry.polygon import orient as _shp_orient

from ._predicates import cross_sign, orient, orient1
from .errors import DomainError, ValidationError

log = logging.getLogger(__name__)

COORD_LIMIT = 1e6
# Distance used to push boundary points into the open interior before a sweep.
NUDGE = 2e-7


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class GeomConfig:
    eps_geom: float = 1e-9
    eps_area: float = 1e-6
    circle_segments: int = 64
    # connection-region sampling; None derives the pitch from the layout
    sample_pitch: float | None = None
    max_samples: int = 400

    def __post_init__(self):
        if not self.eps_geom > 0 or not self.eps_area > 0:
            raise ValidationError("eps_geom and eps_area must be positive")
        if self.circle_segments < 16:
            raise ValidationError("circle_segments must be >= 16")
        if self.sample_pitch is not None and not self.sample_pitch > 0:
            raise ValidationError("sample_pitch must be positive")


DEFAULT_CFG = GeomConfig()


# --------------------------------------------------------------------------
# Layout
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Layout:
    """Simple polygon bounding the service area (CCW, meters).

    Clockwise input is reversed with a warning.
    """

    name: str
    vertices: tuple[Point, ...]
    _memo: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        verts = tuple(Point(float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise ValidationError(f"layout {self.name!r}: need at least 3 vertices")
        arr = np.array(verts, dtype=float)
        if not np.all(np.isfinite(arr)) or np.abs(arr).max() > COORD_LIMIT:
            raise ValidationError(f"layout {self.name!r}: non-finite or out-of-range coordinate")
        step = np.hypot(*(np.roll(arr, -1, axis=0) - arr).T)
        if step.min() <= DEFAULT_CFG.eps_geom:
            raise ValidationError(f"layout {self.name!r}: consecutive vertices coincide")
        if not shapely.LinearRing(arr).is_simple:
            raise ValidationError(f"layout {self.name!r}: boundary self-intersects")
        signed = _signed_area(arr)
        if signed == 0:
            raise ValidationError(f"layout {self.name!r}: zero area")
        if signed < 0:
            warnings.warn(f"layout {self.name!r} is clockwise; reversing", stacklevel=3)
            verts = verts[::-1]
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def from_coords(cls, coords: Iterable[Sequence[float]], name: str = "layout") -> "Layout":
        return cls(name, tuple(Point(float(x), float(y)) for x, y in coords))

    def __len__(self) -> int:
        return len(self.vertices)

    @cached_property
    def arr(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    @cached_property
    def poly(self) -> Polygon:
        p = Polygon(self.arr)
        shapely.prepare(p)
        return p

    @cached_property
    def boundary(self):
        b = self.poly.exterior
        shapely.prepare(b)
        return b

    @property
    def area(self) -> float:
        return float(self.poly.area)

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        return np.hypot(*(np.roll(self.arr, -1, axis=0) - self.arr).T)

    @property
    def shortest_edge(self) -> float:
        return float(self.edge_lengths.min())

    @property
    def perimeter(self) -> float:
        return float(self.edge_lengths.sum())

    @cached_property
    def diameter(self) -> float:
        a = self.arr
        d = a[:, None, :] - a[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    @cached_property
    def _topology(self):
        """Exact per-vertex data that does not depend on the viewpoint."""
        P = self.arr
        n = len(P)
        nxt = np.roll(np.arange(n), -1)
        prv = np.roll(np.arange(n), 1)
        turn = orient(P[prv, 0], P[prv, 1], P[:, 0], P[:, 1], P[nxt, 0], P[nxt, 1])
        # side[j, i]: side of vertex i w.r.t. directed edge j -> j+1
        side = orient(
            P[:, 0][:, None], P[:, 1][:, None], P[nxt, 0][:, None], P[nxt, 1][:, None],
            P[:, 0][None, :], P[:, 1][None, :],
        )
        return nxt, prv, turn, side

    def memo(self, key):
        return self._memo.get(key)

    def remember(self, key, value):
        self._memo[key] = value
        return value


def _signed_area(arr: np.ndarray) -> float:
    x, y = arr[:, 0], arr[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


# --------------------------------------------------------------------------
# Region
# --------------------------------------------------------------------------


def _polygonal_parts(g) -> list[Polygon]:
    if g is None or g.is_empty:
        return []
    if isinstance(g, Polygon):
        return [g]
    if isinstance(g, MultiPolygon):
        return list(g.geoms)
    if hasattr(g, "geoms"):
        out = []
        for sub in g.geoms:
            out.extend(_polygonal_parts(sub))
        return out
    return []


class Region:
    """Union of interior-disjoint polygons.

    Polygons may carry holes (an outage zone can surround a covered island).
    Instances are immutable; all constructors normalise away parts with area
    at most ``eps_area``.
    """

    __slots__ = ("geom",)

    def __init__(self, geom=None, eps_area: float = DEFAULT_CFG.eps_area):
        parts = []
        if geom is not None and not geom.is_empty:
            if not geom.is_valid:
                geom = shapely.make_valid(geom)
            parts = [p for p in _polygonal_parts(geom) if p.area > eps_area]
        if not parts or sum(p.area for p in parts) <= eps_area:
            g = Polygon()
        elif len(parts) == 1:
            g = _shp_orient(parts[0], 1.0)
        else:
            g = MultiPolygon([_shp_orient(p, 1.0) for p in parts])
        object.__setattr__(self, "geom", g)

    def __setattr__(self, name, value):
        raise AttributeError("Region is immutable")

    @classmethod
    def empty(cls) -> "Region":
        return cls()

    @classmethod
    def from_coords(cls, coords: Iterable[Sequence[float]]) -> "Region":
        return cls(Polygon([(float(x), float(y)) for x, y in coords]))

    @classmethod
    def from_layout(cls, L: Layout) -> "Region":
        return cls(L.poly)

    @property
    def is_empty(self) -> bool:
        return self.geom.is_empty

    def __bool__(self) -> bool:
        return not self.is_empty

    @property
    def area(self) -> float:
        return float(self.geom.area)

    @property
    def parts(self) -> list[Polygon]:
        return _polygonal_parts(self.geom)

    @property
    def polys(self) -> list[list[Point]]:
        """Exterior rings (CCW, without the closing repeat)."""
        return [[Point(*c) for c in p.exterior.coords[:-1]] for p in self.parts]

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return self.geom.bounds

    def largest(self) -> Polygon:
        return max(self.parts, key=lambda p: p.area)

    def contains(self, p, tol: float = 0.0) -> bool:
        pt = shapely.Point(p[0], p[1])
        if tol > 0:
            return bool(self.geom.distance(pt) <= tol)
        return bool(self.geom.covers(pt))

    def intersect(self, other: "Region", eps_area: float = DEFAULT_CFG.eps_area) -> "Region":
        return region_boolean("intersect", self, other, eps_area)

    def union(self, other: "Region", eps_area: float = DEFAULT_CFG.eps_area) -> "Region":
        return region_boolean("union", self, other, eps_area)

    def difference(self, other: "Region", eps_area: float = DEFAULT_CFG.eps_area) -> "Region":
        return region_boolean("difference", self, other, eps_area)

    def overlaps(self, other: "Region", eps_area: float = DEFAULT_CFG.eps_area) -> bool:
        """True when the intersection has area above ``eps_area``."""
        if self.is_empty or other.is_empty:
            return False
        a, b = self.bounds, other.bounds
        if a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1]:
            return False
        return safe_intersection(self.geom, other.geom).area > eps_area

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform points inside the region by rejection from its bounding box."""
        if self.is_empty:
            raise DomainError("cannot sample an empty region")
        x0, y0, x1, y1 = self.bounds
        out = []
        got = 0
        while got < n:
            cand = np.column_stack([rng.uniform(x0, x1, 4 * n), rng.uniform(y0, y1, 4 * n)])
            keep = cand[shapely.contains_xy(self.geom, cand[:, 0], cand[:, 1])]
            out.append(keep)
            got += len(keep)
        return np.concatenate(out)[:n]

    def to_json(self) -> list:
        out = []
        for p in self.parts:
            rings = [[list(c) for c in p.exterior.coords[:-1]]]
            rings += [[list(c) for c in h.coords[:-1]] for h in p.interiors]
            out.append(rings)
        return out

    @classmethod
    def from_json(cls, data: list) -> "Region":
        polys = [Polygon(rings[0], rings[1:]) for rings in data]
        if not polys:
            return cls()
        return cls(polys[0] if len(polys) == 1 else MultiPolygon(polys))

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return bool(self.geom.equals(other.geom)) if not (self.is_empty and other.is_empty) else True

    __hash__ = None

    def __repr__(self):
        return f"Region(parts={len(self.parts)}, area={self.area:.6g})"


# GEOS overlay occasionally collapses a proper overlap to points; the relate
# predicate stays right, so degenerate results are redone on a fine grid.
_SNAP = 1e-12


def _redo_degenerate(a, b, out, pattern: str, op):
    sus = np.atleast_1d(shapely.area(out) <= _SNAP)
    if not sus.any():
        return out
    A, B, O = (x.copy() for x in np.broadcast_arrays(*(np.atleast_1d(np.asarray(x, dtype=object)) for x in (a, b, out))))
    idx = np.nonzero(sus & shapely.relate_pattern(A, B, pattern))[0]
    if not len(idx):
        return out
    log.debug("redoing %d degenerate overlay results on a %.0e grid", len(idx), _SNAP)
    O[idx] = op(A[idx], B[idx], grid_size=_SNAP)
    return O if np.ndim(out) else O[0]


def _overlay(op, a, b):
    try:
        return op(a, b)
    except shapely.errors.GEOSException as exc:
        log.debug("overlay failed (%s); retrying on a %.0e grid", exc, _SNAP)
        return op(a, b, grid_size=_SNAP)


def safe_intersection(a, b):
    """``shapely.intersection`` (vectorised) guarded against collapsed overlaps."""
    return _redo_degenerate(a, b, _overlay(shapely.intersection, a, b), "2********", shapely.intersection)


def safe_difference(a, b):
    """``shapely.difference`` (vectorised) guarded against collapsed results."""
    return _redo_degenerate(a, b, _overlay(shapely.difference, a, b), "**2******", shapely.difference)


def region_boolean(op: str, A: Region, B: Region, eps_area: float = DEFAULT_CFG.eps_area) -> Region:
    """Exact polygon clipping (intersect / union / difference) with sliver pruning."""
    if op == "intersect":
        if A.is_empty or B.is_empty:
            return Region()
        g = safe_intersection(A.geom, B.geom)
    elif op == "union":
        g = _overlay(shapely.union, A.geom, B.geom)
    elif op == "difference":
        if A.is_empty:
            return Region()
        g = safe_difference(A.geom, B.geom) if not B.is_empty else A.geom
    else:
        raise ValidationError(f"unknown boolean op {op!r}")
    return Region(g, eps_area)


def union_all(regions: Iterable[Region], eps_area: float = DEFAULT_CFG.eps_area) -> Region:
    geoms = [r.geom for r in regions if not r.is_empty]
    if not geoms:
        return Region()
    return Region(shapely.union_all(geoms), eps_area)


def kgon(center, radius: float, k: int) -> Polygon:
    """Regular k-gon inscribed in the circle of the given radius."""
    ang = 2.0 * np.pi * np.arange(k) / k
    return Polygon(np.column_stack([center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)]))


# --------------------------------------------------------------------------
# Point location and line of sight
# --------------------------------------------------------------------------


def locate(p, L: Layout) -> int:
    """1 strictly inside, 0 on the boundary, -1 outside (exact)."""
    if any(isinstance(v, Fraction) for v in p):
        return _locate_exact(p, L)
    P = L.arr
    nxt = L._topology[0]
    ax, ay = P[:, 0], P[:, 1]
    bx, by = P[nxt, 0], P[nxt, 1]
    s = orient(ax, ay, bx, by, p[0], p[1])
    on = (s == 0) & (np.minimum(ax, bx) <= p[0]) & (p[0] <= np.maximum(ax, bx)) \
        & (np.minimum(ay, by) <= p[1]) & (p[1] <= np.maximum(ay, by))
    if on.any():
        return 0
    up = (ay <= p[1]) & (by > p[1]) & (s > 0)
    down = (ay > p[1]) & (by <= p[1]) & (s < 0)
    return 1 if int(up.sum()) - int(down.sum()) != 0 else -1


def _locate_exact(p, L: Layout) -> int:
    wn = 0
    verts = L.vertices
    n = len(verts)
    for j in range(n):
        a, b = verts[j], verts[(j + 1) % n]
        s = orient1(a, b, p)
        if s == 0 and min(a.x, b.x) <= p[0] <= max(a.x, b.x) and min(a.y, b.y) <= p[1] <= max(a.y, b.y):
            return 0
        if a.y <= p[1] < b.y and s > 0:
            wn += 1
        elif b.y <= p[1] < a.y and s < 0:
            wn -= 1
    return 1 if wn != 0 else -1


def in_layout(p, L: Layout, tol: float = 0.0) -> bool:
    """Closure membership, optionally with a distance tolerance."""
    if locate(p, L) >= 0:
        return True
    return tol > 0 and L.boundary.distance(shapely.Point(p[0], p[1])) <= tol


def segment_inside(P, Q, L: Layout) -> bool:
    """True iff the closed segment PQ lies in the closure of L."""
    if locate(P, L) < 0 or locate(Q, L) < 0:
        return False
    if P[0] == Q[0] and P[1] == Q[1]:
        return True
    A = L.arr
    nxt = L._topology[0]
    ax, ay, bx, by = A[:, 0], A[:, 1], A[nxt, 0], A[nxt, 1]
    o1 = orient(P[0], P[1], Q[0], Q[1], ax, ay)
    o2 = np.roll(o1, -1)
    if np.any(o1 * o2 < 0):
        o3 = orient(ax, ay, bx, by, P[0], P[1])
        o4 = orient(ax, ay, bx, by, Q[0], Q[1])
        if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
            return False
    # vertices touched by the open segment split it into pieces
    dx, dy = Q[0] - P[0], Q[1] - P[1]
    cand = np.nonzero(o1 == 0)[0]
    touch = []
    if len(cand):
        fx = [Fraction(P[0]), Fraction(P[1]), Fraction(Q[0]), Fraction(Q[1])]
        ddx, ddy = fx[2] - fx[0], fx[3] - fx[1]
        den = ddx * ddx + ddy * ddy
        for j in cand:
            if abs((A[j, 0] - P[0]) * dx + (A[j, 1] - P[1]) * dy) > 2 * (dx * dx + dy * dy) + 1.0:
                continue
            t = ((Fraction(A[j, 0]) - fx[0]) * ddx + (Fraction(A[j, 1]) - fx[1]) * ddy) / den
            if 0 < t < 1:
                touch.append(t)
    if not touch and locate(P, L) == 1 and locate(Q, L) == 1:
        return True
    ts = [Fraction(0)] + sorted(set(touch)) + [Fraction(1)]
    fP = (Fraction(P[0]), Fraction(P[1]))
    fQ = (Fraction(Q[0]), Fraction(Q[1]))
    for t0, t1 in zip(ts[:-1], ts[1:]):
        tm = (t0 + t1) / 2
        mid = (fP[0] + tm * (fQ[0] - fP[0]), fP[1] + tm * (fQ[1] - fP[1]))
        if _locate_exact(mid, L) < 0:
            return False
    return True


def segments_clear(p0: np.ndarray, p1: np.ndarray, L: Layout, chunk: int = 4096) -> np.ndarray:
    """Float, vectorised LoS for many segments: no proper crossing with any wall.

    Intended for Monte Carlo evaluation where grazing contacts have measure
    zero; exact decisions go through :func:`segment_inside`.
    """
    p0 = np.asarray(p0, float).reshape(-1, 2)
    p1 = np.asarray(p1, float).reshape(-1, 2)
    A = L.arr
    B = np.roll(A, -1, axis=0)
    E = B - A
    out = np.ones(len(p0), dtype=bool)
    for s in range(0, len(p0), chunk):
        a = p0[s:s + chunk, None, :]
        b = p1[s:s + chunk, None, :]
        d = b - a
        o1 = d[..., 0] * (A[None, :, 1] - a[..., 1]) - d[..., 1] * (A[None, :, 0] - a[..., 0])
        o2 = d[..., 0] * (B[None, :, 1] - a[..., 1]) - d[..., 1] * (B[None, :, 0] - a[..., 0])
        o3 = E[None, :, 0] * (a[..., 1] - A[None, :, 1]) - E[None, :, 1] * (a[..., 0] - A[None, :, 0])
        o4 = E[None, :, 0] * (b[..., 1] - A[None, :, 1]) - E[None, :, 1] * (b[..., 0] - A[None, :, 0])
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        out[s:s + chunk] = ~hit.any(axis=1)
    return out


# --------------------------------------------------------------------------
# Visibility
# --------------------------------------------------------------------------


def _interior_anchor(p, L: Layout) -> tuple[float, float]:
    """Return p itself when safely interior, else a point NUDGE inside."""
    x, y = float(p[0]), float(p[1])
    loc = locate((x, y), L)
    dist = L.boundary.distance(shapely.Point(x, y))
    if loc == 1 and dist > NUDGE / 4:
        return x, y
    if loc < 0 and dist > DEFAULT_CFG.eps_geom:
        raise DomainError(f"point ({x:.9g}, {y:.9g}) lies outside layout {L.name!r}")
    A = L.arr
    B = np.roll(A, -1, axis=0)
    E = B - A
    seg_len = np.hypot(E[:, 0], E[:, 1])
    t = np.clip(((x - A[:, 0]) * E[:, 0] + (y - A[:, 1]) * E[:, 1]) / seg_len**2, 0, 1)
    dd = np.hypot(A[:, 0] + t * E[:, 0] - x, A[:, 1] + t * E[:, 1] - y)
    near = np.nonzero(dd <= dd.min() + 1e-6)[0]
    normals = np.column_stack([-E[near, 1], E[near, 0]]) / seg_len[near, None]
    dirs = [normals.sum(axis=0)] + list(normals)
    dirs += [np.array([math.cos(a), math.sin(a)]) for a in np.linspace(0, 2 * np.pi, 48, endpoint=False)]
    fallback = None
    for step in (NUDGE, 4 * NUDGE, 16 * NUDGE):
        for d in dirs:
            nrm = math.hypot(d[0], d[1])
            if nrm == 0:
                continue
            q = (x + step * d[0] / nrm, y + step * d[1] / nrm)
            if locate(q, L) == 1:
                if L.boundary.distance(shapely.Point(*q)) > step / 4:
                    return q
                fallback = fallback or q
    if fallback is not None:
        # thin wedge: any strictly interior point is fine for the exact sweep
        return fallback
    raise DomainError(f"cannot find interior point near ({x:.9g}, {y:.9g})")


def _visibility_ring(L: Layout, x: float, y: float) -> np.ndarray:
    """Vertices (CCW) of the visibility polygon from an interior point.

    Events are the layout vertices.  Along each event ray the walk decides,
    with exact predicates, which vertices are seen, whether the ray grazes on
    past them, and where the boundary lies just before and just after the ray.
    """
    P = L.arr
    n = len(P)
    nxt, prv, turn, side = L._topology
    px, py = P[:, 0], P[:, 1]
    D = P - (x, y)

    O = cross_sign(x, y, px[:, None], py[:, None], x, y, px[None, :], py[None, :])
    dot = D @ D.T
    same = (O == 0) & (dot > 0)

    On = O[:, nxt]
    proper = (O * On) < 0
    eX = orient(x, y, px, py, px[nxt], py[nxt])
    forward = proper & (eX[None, :] == On) & (eX[None, :] != 0)
    E = P[nxt] - P
    tnum = (P[:, 0] - x) * E[:, 1] - (P[:, 1] - y) * E[:, 0]
    tden = D[:, 0:1] * E[None, :, 1] - D[:, 1:2] * E[None, :, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        tmat = np.where(forward, tnum[None, :] / tden, np.inf)
    tc = tmat.min(axis=1)
    # edge j crosses the ray before vertex i iff i and X are on opposite sides of j
    blocked_by = forward & (side.T == -eX[None, :])

    a1 = cross_sign(px[prv], py[prv], px, py, x, y, px, py)
    a2 = cross_sign(px, py, px[nxt], py[nxt], x, y, px, py)
    cont = np.where(turn > 0, (a1 >= 0) & (a2 >= 0), np.where(turn < 0, (a1 >= 0) | (a2 >= 0), a2 >= 0))
    rightv = (O[np.arange(n), prv] < 0) | (O[np.arange(n), nxt] < 0)
    leftv = (O[np.arange(n), prv] > 0) | (O[np.arange(n), nxt] > 0)

    angles = np.arctan2(D[:, 1], D[:, 0])
    events: list[tuple[float, int, float, float]] = []
    cnt = same.sum(axis=1)
    done = np.zeros(n, dtype=bool)

    for i in range(n):
        if done[i]:
            continue
        if cnt[i] == 1:
            done[i] = True
            if blocked_by[i].any():
                continue
            vi = (px[i], py[i])
            if cont[i] and np.isfinite(tc[i]):
                far = (x + tc[i] * D[i, 0], y + tc[i] * D[i, 1])
            else:
                far = vi
            lo = vi if rightv[i] else far
            hi = vi if leftv[i] else far
        else:
            members = np.nonzero(same[i])[0]
            done[members] = True
            tpar = dot[i, members] / dot[i, i]
            members = members[np.argsort(tpar)]
            row_t = tmat[i]
            first_cross = row_t.min()
            lo = hi = None
            stop = None
            seen_any = False
            for m in members:
                if blocked_by[m].any():
                    stop = (x + first_cross * D[i, 0], y + first_cross * D[i, 1])
                    break
                seen_any = True
                vm = (px[m], py[m])
                if lo is None and rightv[m]:
                    lo = vm
                if hi is None and leftv[m]:
                    hi = vm
                if not cont[m]:
                    stop = vm
                    break
            if not seen_any:
                continue
            if stop is None:
                if np.isfinite(first_cross):
                    stop = (x + first_cross * D[i, 0], y + first_cross * D[i, 1])
                else:
                    stop = (px[members[-1]], py[members[-1]])
            lo = lo if lo is not None else stop
            hi = hi if hi is not None else stop
        ang = float(angles[i])
        events.append((ang, 0, lo[0], lo[1]))
        if hi[0] != lo[0] or hi[1] != lo[1]:
            events.append((ang, 1, hi[0], hi[1]))
    events.sort(key=lambda e: (e[0], e[1]))
    return np.array([(e[2], e[3]) for e in events], dtype=float)


def visibility_polygon(X, L: Layout) -> Region:
    """Region of points Y with segment XY inside the layout (no range limit)."""
    x, y = _interior_anchor(X, L)
    key = ("vis", x, y)
    hit = L.memo(key)
    if hit is not None:
        return hit
    ring = _visibility_ring(L, x, y)
    poly = Polygon(ring) if len(ring) >= 3 else Polygon()
    if not poly.is_valid:
        poly = shapely.make_valid(poly)
    reg = Region(poly)
    if len(L._memo) > 20000:
        L._memo.clear()
    return L.remember(key, reg)


def visibility_area_point(X, L: Layout, r: float, cfg: GeomConfig = DEFAULT_CFG,
                          outer: bool = False) -> Region:
    """Visibility polygon clipped to the range disk.

    The disk is the inscribed regular ``circle_segments``-gon, so the result
    never exceeds the true visibility area.  ``outer=True`` uses the
    circumscribed polygon instead, for callers that need a superset
    (hidden-set certificates).
    """
    if not r > 0:
        raise DomainError("range must be positive")
    k = cfg.circle_segments
    rad = r / math.cos(math.pi / k) if outer else r
    vis = visibility_polygon(X, L)
    return Region(safe_intersection(vis.geom, kgon(X, rad, k)), cfg.eps_area)


def default_sample_pitch(L: Layout, r: float | None = None) -> float:
    pitch = L.shortest_edge / 4
    if r is not None:
        pitch = min(pitch, r / 10)
    return pitch


def boundary_samples(A: Region, pitch: float, max_samples: int) -> np.ndarray:
    """Vertices of every ring of A plus points spaced ``pitch`` along the rings."""
    rings = []
    for p in A.parts:
        rings.append(np.asarray(p.exterior.coords))
        rings.extend(np.asarray(h.coords) for h in p.interiors)
    perim = sum(float(np.hypot(*np.diff(rg, axis=0).T).sum()) for rg in rings)
    nverts = sum(len(rg) - 1 for rg in rings)
    budget = max(max_samples - nverts, 0)
    if budget and perim / pitch > budget:
        pitch = perim / budget
    pts = []
    for rg in rings:
        for a, b in zip(rg[:-1], rg[1:]):
            seg = float(math.hypot(b[0] - a[0], b[1] - a[1]))
            k = int(seg // pitch) if budget else 0
            pts.append(a[None, :])
            if k > 0:
                t = (np.arange(1, k + 1) / (k + 1))[:, None]
                pts.append(a + t * (b - a))
    out = np.concatenate(pts)
    return np.unique(np.round(out, 12), axis=0)


def connection_region(A: Region, L: Layout, cfg: GeomConfig = DEFAULT_CFG,
                      pitch: float | None = None) -> Region:
    """Conservative approximation of the set of points seen from some point of A.

    A sight line from inside A that reaches beyond A crosses the boundary
    of A, so it suffices to union A with the visibility polygons of points
    sampled on A's boundary.  Sampling only ever drops points, never adds
    spurious ones.
    """
    if A.is_empty:
        return Region()
    if pitch is None:
        pitch = cfg.sample_pitch or default_sample_pitch(L)
    pts = boundary_samples(A, pitch, cfg.max_samples)
    geoms = [A.geom]
    for p in pts:
        try:
            geoms.append(visibility_polygon(p, L).geom)
        except DomainError:
            log.debug("connection_region: skipping sample outside layout %s", p)
    return Region(shapely.union_all(geoms), cfg.eps_area)


def representative_point(R: Region) -> Point:
    """Centroid of the largest part when it lies inside, else the pole of inaccessibility."""
    if R.is_empty:
        raise DomainError("empty region has no representative point")
    big = R.largest()
    c = big.centroid
    if big.contains(c):
        return Point(float(c.x), float(c.y))
    tol = max(math.sqrt(big.area) * 1e-4, 1e-9)
    q = shapely.ops.polylabel(big, tolerance=tol)
    return Point(float(q.x), float(q.y))


import shapely.ops  # noqa: E402  (polylabel lives in the ops submodule)
