"""Ear-clipping triangulation and longest-side hyper triangulation."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ._predicates import orient
from .errors import DomainError, InternalInvariantError, ValidationError
from .geometry import Layout, Point

MAX_TRIANGLES = 200_000


@dataclass(frozen=True)
class Triangle:
    a: Point
    b: Point
    c: Point
    id: int

    @property
    def corners(self) -> tuple[Point, Point, Point]:
        return (self.a, self.b, self.c)

    @property
    def area(self) -> float:
        return 0.5 * ((self.b.x - self.a.x) * (self.c.y - self.a.y) - (self.b.y - self.a.y) * (self.c.x - self.a.x))

    @property
    def centroid(self) -> Point:
        return Point((self.a.x + self.b.x + self.c.x) / 3, (self.a.y + self.b.y + self.c.y) / 3)

    @property
    def longest_side(self) -> float:
        p = self.corners
        return max(math.dist(p[i], p[(i + 1) % 3]) for i in range(3))

    def barycentric(self, u: float, v: float) -> Point:
        w = 1.0 - u - v
        return Point(w * self.a.x + u * self.b.x + v * self.c.x, w * self.a.y + u * self.b.y + v * self.c.y)


@dataclass(frozen=True)
class Partition:
    """Conforming triangle mesh of a layout.

    ``points`` holds the mesh vertices and ``tris`` their CCW index triples,
    so shared corners are shared indices.
    """

    points: np.ndarray
    tris: np.ndarray
    R_used: float = math.inf

    @property
    def triangles(self) -> list[Triangle]:
        P = self.points
        return [Triangle(Point(*P[i]), Point(*P[j]), Point(*P[k]), t) for t, (i, j, k) in enumerate(self.tris)]

    def __len__(self) -> int:
        return len(self.tris)

    def triangle(self, tid: int) -> Triangle:
        i, j, k = self.tris[tid]
        P = self.points
        return Triangle(Point(*P[i]), Point(*P[j]), Point(*P[k]), tid)

    @property
    def areas(self) -> np.ndarray:
        a, b, c = (self.points[self.tris[:, i]] for i in range(3))
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    def max_side(self) -> float:
        P, T = self.points, self.tris
        sides = [np.hypot(*(P[T[:, (i + 1) % 3]] - P[T[:, i]]).T) for i in range(3)]
        return float(np.max(sides))

    def to_json(self) -> dict:
        return {"R_used": None if math.isinf(self.R_used) else self.R_used,
                "triangles": [[list(map(float, self.points[i])) for i in t] for t in self.tris]}


def _ear_clip(P: np.ndarray) -> list[tuple[int, int, int]]:
    idx = list(range(len(P)))
    out = []
    while len(idx) > 3:
        m = len(idx)
        ring = np.array(idx)
        prv = np.roll(ring, 1)
        nxt = np.roll(ring, -1)
        convex = orient(P[prv, 0], P[prv, 1], P[ring, 0], P[ring, 1], P[nxt, 0], P[nxt, 1]) > 0
        found = False
        for k in np.nonzero(convex)[0]:
            a, b, c = prv[k], ring[k], nxt[k]
            others = ring[(np.arange(m) != k) & (ring != a) & (ring != c)]
            if len(others):
                ox, oy = P[others, 0], P[others, 1]
                s1 = orient(P[a, 0], P[a, 1], P[b, 0], P[b, 1], ox, oy)
                s2 = orient(P[b, 0], P[b, 1], P[c, 0], P[c, 1], ox, oy)
                s3 = orient(P[c, 0], P[c, 1], P[a, 0], P[a, 1], ox, oy)
                if np.any((s1 >= 0) & (s2 >= 0) & (s3 >= 0)):
                    continue
            out.append((int(a), int(b), int(c)))
            idx.pop(int(k))
            found = True
            break
        if not found:
            raise InternalInvariantError("ear clipping found no ear; layout is degenerate")
    a, b, c = idx
    if orient(P[a, 0], P[a, 1], P[b, 0], P[b, 1], P[c, 0], P[c, 1])[0] <= 0:
        raise ValidationError("degenerate final triangle in ear clipping")
    out.append((a, b, c))
    return out


def triangulate(L: Layout) -> Partition:
    """Split the layout into n - 2 triangles along interior diagonals."""
    P = L.arr.copy()
    tris = _ear_clip(P)
    return Partition(P, np.array(tris, dtype=np.int64))


def hyper_triangulate(L: Layout, R: float) -> Partition:
    """Bisect longest sides until every triangle side is at most ``R``.

    Each cut joins the midpoint of the longest side to the opposite corner;
    the triangle on the other side of that edge is split at the same
    midpoint so the mesh stays conforming.  Oversized triangles are processed
    FIFO by creation id.
    """
    if not R > 0:
        raise DomainError("R must be positive")
    base = triangulate(L)
    pts = [tuple(p) for p in base.points]
    tris: dict[int, tuple[int, int, int]] = {}
    edge_map: dict[tuple[int, int], set[int]] = {}
    queue: deque[int] = deque()
    next_id = 0

    def key(u, v):
        return (u, v) if u < v else (v, u)

    def add(t):
        nonlocal next_id
        tid = next_id
        next_id += 1
        tris[tid] = t
        for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            edge_map.setdefault(key(*e), set()).add(tid)
        queue.append(tid)
        return tid

    def drop(tid):
        t = tris.pop(tid)
        for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            s = edge_map[key(*e)]
            s.discard(tid)
            if not s:
                del edge_map[key(*e)]

    def length(u, v):
        return math.dist(pts[u], pts[v])

    for t in base.tris:
        add(tuple(int(x) for x in t))

    while queue:
        tid = queue.popleft()
        t = tris.get(tid)
        if t is None:
            continue
        sides = [(t[i], t[(i + 1) % 3]) for i in range(3)]
        longest = max(length(*e) for e in sides)
        if longest <= R:
            continue
        u, v = min((e for e in sides if length(*e) == longest), key=lambda e: key(*e))
        pu, pv = pts[u], pts[v]
        m = len(pts)
        pts.append(((pu[0] + pv[0]) / 2, (pu[1] + pv[1]) / 2))
        for nb in sorted(edge_map.get(key(u, v), ())):
            a, b, c = tris[nb]
            # rotate so the split edge is (a, b)
            while {a, b} != {u, v}:
                a, b, c = b, c, a
            drop(nb)
            add((a, m, c))
            add((m, b, c))
        if len(tris) > MAX_TRIANGLES:
            raise DomainError(f"hyper triangulation exceeded {MAX_TRIANGLES} triangles; R too small")

    order = sorted(tris)
    return Partition(np.array(pts, dtype=float), np.array([tris[i] for i in order], dtype=np.int64), float(R))


def default_R(r: float, mode: str = "access") -> float:
    """Side bound used for the planners: ``r`` for both access and connectivity."""
    if mode not in ("access", "connectivity"):
        raise ValidationError(f"unknown mode {mode!r}")
    if not r > 0:
        raise DomainError("range must be positive")
    return float(r)
